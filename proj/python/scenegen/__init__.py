"""Physics-verified tabletop scene generation.

Thin Python surface over the C++ core: scene construction, the placement
environment, heightmap rendering, distribution numerics and trained-policy
inference.
"""

from scenegen._core import (  # noqa: F401
    GeneratorConfig,
    GeneratorEnv,
    ObjectSpec,
    ObservationConfig,
    Policy,
    QueriedRegion,
    SceneParseError,
    SceneSpec,
    Shape,
    SimulationDivergedError,
    StabilityReport,
    StabilityThresholds,
    StepFlags,
    __version__,
    action_to_world_pose,
    beta_entropy,
    beta_log_prob,
    catalog_group,
    compute_gae,
    digamma,
    drop_and_settle,
    erf,
    lgamma,
    load_policy,
    make_scene,
    procedural_catalog,
    render_region_heightmap,
    rrs_episode_success,
    serialize_scene_json,
    trunc_normal_entropy,
    trunc_normal_log_prob,
)
