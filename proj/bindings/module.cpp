#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "scenegen/distill.hpp"
#include "scenegen/evalsuite.hpp"
#include "scenegen/heightmap.hpp"
#include "scenegen/runconfig.hpp"
#include "scenegen/special.hpp"

namespace py = pybind11;
using namespace scenegen;

namespace {

Shape make_shape(const std::string& kind, const std::vector<double>& dims) {
  const Shape::Kind k = shape_kind_from_string(kind);
  switch (k) {
    case Shape::Kind::Cuboid:
      return Shape::cuboid(dims.at(0), dims.at(1), dims.at(2));
    case Shape::Kind::Cylinder:
      return Shape::cylinder(dims.at(0), dims.at(1));
    case Shape::Kind::Sphere:
      return Shape::sphere(dims.at(0));
  }
  throw std::invalid_argument("unknown shape kind");
}

py::array_t<double> heightmap_array(const Heightmap& hm) {
  py::array_t<double> arr({hm.grid, hm.grid});
  auto buf = arr.mutable_unchecked<2>();
  for (int iy = 0; iy < hm.grid; ++iy) {
    for (int ix = 0; ix < hm.grid; ++ix) buf(iy, ix) = hm.at(ix, iy);
  }
  return arr;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Physics-verified tabletop scene generation core";

  py::register_exception<SimulationDiverged>(m, "SimulationDivergedError");
  py::register_exception<SceneParseError>(m, "SceneParseError");

  py::class_<Shape>(m, "Shape")
      .def(py::init(&make_shape), py::arg("kind"), py::arg("dims"))
      .def_property_readonly("kind", [](const Shape& s) { return std::string(to_string(s.kind)); })
      .def_property_readonly("dims", [](const Shape& s) {
        return std::vector<double>{s.dims.x(), s.dims.y(), s.dims.z()};
      })
      .def("bottom_offset", &Shape::bottom_offset)
      .def("volume", &Shape::volume);

  py::class_<ObjectSpec>(m, "ObjectSpec")
      .def(py::init([](const std::string& id, const Shape& shape, double mass,
                       double friction, const std::string& color) {
             ObjectSpec o;
             o.id = id;
             o.shape = shape;
             o.mass = mass;
             o.friction = friction;
             o.color = color;
             return o;
           }),
           py::arg("id"), py::arg("shape"), py::arg("mass") = 0.3,
           py::arg("friction") = 0.5, py::arg("color") = "")
      .def_readonly("id", &ObjectSpec::id)
      .def_readonly("mass", &ObjectSpec::mass)
      .def_readonly("friction", &ObjectSpec::friction)
      .def_readonly("shape", &ObjectSpec::shape)
      .def_readonly("color", &ObjectSpec::color);

  py::class_<QueriedRegion>(m, "QueriedRegion")
      .def(py::init([](const Vec3& center, const Vec3& half_extents, double yaw) {
             QueriedRegion r;
             r.center = center;
             r.half_extents = half_extents;
             r.yaw = yaw;
             return r;
           }),
           py::arg("center"), py::arg("half_extents"), py::arg("yaw") = 0.0)
      .def_readwrite("center", &QueriedRegion::center)
      .def_readwrite("half_extents", &QueriedRegion::half_extents)
      .def_readwrite("yaw", &QueriedRegion::yaw);

  py::class_<SceneSpec>(m, "SceneSpec")
      .def_readonly("region", &SceneSpec::region)
      .def_readonly("catalog", &SceneSpec::catalog)
      .def_readonly("query_order", &SceneSpec::query_order);

  m.def("make_scene",
        [](double table_w, double table_l, double table_h, const Vec3& region_he,
           int group, int objects) {
          TableSpec table;
          table.width = table_w;
          table.length = table_l;
          table.height = table_h;
          return make_scene(table, region_he, group, objects);
        },
        py::arg("table_w") = 0.60, py::arg("table_l") = 0.70,
        py::arg("table_h") = 0.70,
        py::arg("region_half_extents") = Vec3(0.25, 0.30, 0.15),
        py::arg("group") = 1, py::arg("objects") = 4);

  m.def("procedural_catalog", &procedural_catalog, py::arg("group_seed"),
        py::arg("n") = 10);
  m.def("catalog_group", &catalog_group, py::arg("group"), py::arg("n") = 10);

  m.def("action_to_world_pose",
        [](const QueriedRegion& region, const Eigen::Vector4d& action,
           const ObjectSpec& object) {
          const Pose p = action_to_world_pose(region, action, object);
          return py::make_tuple(p.position, p.yaw);
        });

  // Special functions and distribution numerics.
  m.def("lgamma", &sf::lgamma);
  m.def("digamma", &sf::digamma);
  m.def("erf", &sf::erf);
  m.def("beta_log_prob", &beta_log_prob);
  m.def("beta_entropy", &beta_entropy);
  m.def("trunc_normal_log_prob", &trunc_normal_log_prob, py::arg("mu"),
        py::arg("sigma"), py::arg("x"), py::arg("lo") = -1.0, py::arg("hi") = 1.0);
  m.def("trunc_normal_entropy", &trunc_normal_entropy, py::arg("mu"),
        py::arg("sigma"), py::arg("lo") = -1.0, py::arg("hi") = 1.0);

  m.def("compute_gae",
        [](const std::vector<double>& rewards, const std::vector<double>& values,
           const std::vector<int>& dones, double bootstrap, double gamma,
           double lam) {
          std::vector<std::uint8_t> d(dones.begin(), dones.end());
          return compute_gae(rewards, values, d, bootstrap, gamma, lam);
        },
        py::arg("rewards"), py::arg("values"), py::arg("dones"),
        py::arg("bootstrap_value") = 0.0, py::arg("gamma") = 0.99,
        py::arg("lambda") = 0.95);

  py::class_<StabilityThresholds>(m, "StabilityThresholds")
      .def(py::init<>())
      .def_readwrite("lin_vel_max", &StabilityThresholds::lin_vel_max)
      .def_readwrite("lin_acc_max", &StabilityThresholds::lin_acc_max)
      .def_readwrite("ang_vel_max", &StabilityThresholds::ang_vel_max)
      .def_readwrite("ang_acc_max", &StabilityThresholds::ang_acc_max)
      .def_readwrite("reach_window", &StabilityThresholds::reach_window)
      .def_readwrite("hold_window", &StabilityThresholds::hold_window);

  py::class_<StabilityReport>(m, "StabilityReport")
      .def_readonly("stable", &StabilityReport::stable)
      .def_readonly("stable_step", &StabilityReport::stable_step)
      .def_readonly("velocity_sum", &StabilityReport::velocity_sum)
      .def_readonly("acceleration_sum", &StabilityReport::acceleration_sum);

  // Settle one object dropped over the default table; smoke-level physics.
  m.def("drop_and_settle",
        [](const Shape& shape, double mass, const Vec3& position, double yaw,
           int max_steps) {
          World world;
          TableSpec table;
          world.add_body(table.to_body());
          RigidBody body = RigidBody::make(shape, mass, 0.5, 0.0);
          body.state.position = position;
          body.state.orientation = yaw_quat(yaw);
          const int id = world.add_body(body);
          StabilityThresholds thr;
          const Trajectory traj = world.settle(id, max_steps, &thr);
          const StabilityReport rep = check_stability(traj, thr);
          return py::make_tuple(rep, world.body(id).state.position,
                                traj.samples.size());
        },
        py::arg("shape"), py::arg("mass"), py::arg("position"),
        py::arg("yaw") = 0.0, py::arg("max_steps") = 240);

  py::class_<GeneratorConfig>(m, "GeneratorConfig")
      .def(py::init<>())
      .def_readwrite("max_attempts", &GeneratorConfig::max_attempts)
      .def_readwrite("settle_steps", &GeneratorConfig::settle_steps)
      .def_readwrite("penalty_scale", &GeneratorConfig::penalty_scale)
      .def_readwrite("base_reward", &GeneratorConfig::base_reward)
      .def_readwrite("drop_epsilon", &GeneratorConfig::drop_epsilon);

  py::class_<ObservationConfig>(m, "ObservationConfig")
      .def(py::init<>())
      .def_readwrite("grid", &ObservationConfig::grid)
      .def_readwrite("history_slots", &ObservationConfig::history_slots)
      .def_readwrite("traj_samples", &ObservationConfig::traj_samples)
      .def_readwrite("open_loop", &ObservationConfig::open_loop)
      .def("observation_dim", &ObservationConfig::observation_dim)
      .def("slot_width", &ObservationConfig::slot_width);

  py::class_<StepFlags>(m, "StepFlags")
      .def_readonly("attempt_failed", &StepFlags::attempt_failed)
      .def_readonly("object_done", &StepFlags::object_done)
      .def_readonly("episode_done", &StepFlags::episode_done)
      .def_readonly("episode_success", &StepFlags::episode_success);

  py::class_<GeneratorEnv>(m, "GeneratorEnv")
      .def(py::init<SceneSpec, GeneratorConfig, ObservationConfig>(),
           py::arg("scene"), py::arg("config") = GeneratorConfig{},
           py::arg("observation") = ObservationConfig{})
      .def("reset",
           [](GeneratorEnv& env, std::uint64_t seed) {
             Rng rng(seed);
             return env.reset(rng);
           },
           py::arg("seed") = 0)
      .def("step",
           [](GeneratorEnv& env, const Eigen::Vector4d& action) {
             const StepResult r = env.step(action);
             return py::make_tuple(r.reward, r.observation, r.flags);
           })
      .def("episode_done", &GeneratorEnv::episode_done)
      .def("episode_success", &GeneratorEnv::episode_success)
      .def("object_index", &GeneratorEnv::object_index)
      .def("attempt_index", &GeneratorEnv::attempt_index)
      .def("observe", &GeneratorEnv::observe)
      .def("heightmap", [](const GeneratorEnv& env, int grid) {
        return heightmap_array(render_heightmap(env.world(), env.region(), grid));
      });

  m.def("render_region_heightmap",
        [](const SceneSpec& spec, int grid) {
          World world;
          world.add_body(spec.table.to_body());
          return heightmap_array(render_heightmap(world, spec.region, grid));
        },
        py::arg("scene"), py::arg("grid") = 64);

  py::class_<ActorCritic>(m, "Policy")
      .def("obs_dim", &ActorCritic::obs_dim)
      .def("value", &ActorCritic::value)
      .def("act",
           [](const ActorCritic& policy, const VectorXd& obs, std::uint64_t seed) {
             Rng rng(seed);
             const ActionSample s = policy.sample_action(obs, rng);
             return py::make_tuple(s.a, s.log_prob);
           },
           py::arg("obs"), py::arg("seed") = 0)
      .def("mode_action", &ActorCritic::mode_action);

  m.def("load_policy", [](const std::string& path) {
    return load_checkpoint(path).policy;
  });

  m.def("serialize_scene_json",
        [](const SceneSpec& spec) { return serialize_scene(spec, {}).dump(); });
  m.def("rrs_episode_success", [](const SceneSpec& spec, std::uint64_t seed) {
    Rng rng(seed);
    GeneratorConfig cfg;
    ObservationConfig obs;
    obs.grid = 16;
    return rrs_episode(spec, cfg, obs, rng).success;
  });

  m.attr("__version__") = "0.1.0";
}
