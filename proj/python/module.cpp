// Python bindings for the microopt core: oracle simulation, slice-model
// training and inference, degradation estimates, the primal-dual optimizer
// and the brute-force baselines.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "microopt/baselines.hpp"
#include "microopt/degradation.hpp"
#include "microopt/domain.hpp"
#include "microopt/harness.hpp"
#include "microopt/model_adapters.hpp"
#include "microopt/optimizer.hpp"
#include "microopt/oracle.hpp"
#include "microopt/slicemodel.hpp"
#include "microopt/traffic.hpp"

namespace py = pybind11;
using namespace microopt;

namespace {

ResourceVector to_resource(const std::vector<double>& v) { return ResourceVector(v); }

std::vector<const QoSRow*> split_ptr_rows(const QoSDataset& ds, const std::string& split) {
    return ds.split_rows(split_from_name(split));
}

} // namespace

PYBIND11_MODULE(_microopt, m) {
    m.doc() = "Slice QoS modeling and resource optimization core";

    py::class_<CostWeights>(m, "CostWeights")
        .def(py::init<>())
        .def(py::init<std::vector<double>>())
        .def_readonly("values", &CostWeights::values);

    py::class_<SlaSpec>(m, "SlaSpec")
        .def(py::init([](double q, double beta) {
                 return SlaSpec{q, beta, CostWeights()};
             }),
             py::arg("q_thresh"), py::arg("beta_thresh"))
        .def_readwrite("q_thresh", &SlaSpec::q_thresh)
        .def_readwrite("beta_thresh", &SlaSpec::beta_thresh);

    py::class_<TrafficSeries>(m, "TrafficSeries")
        .def(py::init<std::vector<double>>())
        .def_static("constant", &TrafficSeries::constant, py::arg("users_per_s"), py::arg("tau"))
        .def_readonly("values", &TrafficSeries::values)
        .def("total", &TrafficSeries::total)
        .def("__len__", [](const TrafficSeries& t) { return t.tau(); });

    m.def(
        "normalized_cost",
        [](const std::vector<double>& weights, const std::vector<double>& r) {
            return normalized_cost(CostWeights(weights), to_resource(r));
        },
        py::arg("weights"), py::arg("r"));
    m.def(
        "validate_sla",
        [](const SlaSpec& sla) {
            const Verdict v = validate_sla(sla);
            return py::make_tuple(v.ok, v.reason);
        },
        py::arg("sla"));

    py::class_<OracleParams>(m, "OracleParams")
        .def(py::init<>())
        .def_readwrite("cpu_capacity_slope", &OracleParams::cpu_capacity_slope)
        .def_readwrite("app_max_rate", &OracleParams::app_max_rate)
        .def_readwrite("noise_base", &OracleParams::noise_base)
        .def_readwrite("noise_slope", &OracleParams::noise_slope);

    py::class_<RangeSpec>(m, "RangeSpec")
        .def(py::init([](double lo, double hi, double step) {
                 return RangeSpec{lo, hi, step};
             }),
             py::arg("lo"), py::arg("hi"), py::arg("step"))
        .def("points", &RangeSpec::points);

    py::class_<GridSpec>(m, "GridSpec")
        .def(py::init<>())
        .def_readwrite("traffic_range", &GridSpec::traffic_range)
        .def_readwrite("bandwidth_range", &GridSpec::bandwidth_range)
        .def_readwrite("cpu_range", &GridSpec::cpu_range)
        .def_readwrite("samples_per_point", &GridSpec::samples_per_point);

    py::class_<QoSDataset>(m, "QoSDataset")
        .def("__len__", [](const QoSDataset& ds) { return ds.rows.size(); })
        .def("count", [](const QoSDataset& ds, const std::string& split) {
            return ds.count(split_from_name(split));
        })
        .def("rows", [](const QoSDataset& ds, const std::string& split) {
            py::list out;
            for (const QoSRow* row : split_ptr_rows(ds, split)) {
                out.append(py::make_tuple(row->traffic, row->r.values, row->qos));
            }
            return out;
        });

    m.def(
        "oracle_qos_mean",
        [](double x, const std::vector<double>& r, const OracleParams& p) {
            return oracle_qos_mean(x, to_resource(r), p);
        },
        py::arg("traffic"), py::arg("r"), py::arg("params") = OracleParams{});
    m.def(
        "oracle_qos_sample",
        [](double x, const std::vector<double>& r, const OracleParams& p, std::uint64_t seed) {
            return oracle_qos_sample(x, to_resource(r), p, seed);
        },
        py::arg("traffic"), py::arg("r"), py::arg("params") = OracleParams{},
        py::arg("seed") = 0);
    m.def("generate_grid_dataset", &generate_grid_dataset, py::arg("grid"), py::arg("params"),
          py::arg("seed"), py::arg("validation_fraction") = 0.1);
    m.def(
        "evaluate_allocation",
        [](const TrafficSeries& traffic, const std::vector<double>& r, const SlaSpec& sla,
           const OracleParams& p, int n_trials, std::uint64_t seed) {
            return evaluate_allocation(traffic, to_resource(r), sla, p, n_trials, seed);
        },
        py::arg("traffic"), py::arg("r"), py::arg("sla"), py::arg("params") = OracleParams{},
        py::arg("n_trials") = 200, py::arg("seed") = 0);

    py::class_<ModelArch>(m, "ModelArch")
        .def(py::init<>())
        .def_readwrite("resource_dim", &ModelArch::resource_dim)
        .def_readwrite("shared_layers", &ModelArch::shared_layers)
        .def_readwrite("hidden_units", &ModelArch::hidden_units)
        .def_readwrite("branch_units", &ModelArch::branch_units);

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("epochs", &TrainConfig::epochs)
        .def_readwrite("learning_rate", &TrainConfig::learning_rate)
        .def_readwrite("lr_decay_epoch", &TrainConfig::lr_decay_epoch)
        .def_readwrite("lr_decay_factor", &TrainConfig::lr_decay_factor)
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("momentum", &TrainConfig::momentum)
        .def_readwrite("seed", &TrainConfig::seed);

    py::class_<SliceModel>(m, "SliceModel")
        .def(
            "predict",
            [](const SliceModel& model, double x, const std::vector<double>& r) {
                const MuSigma d = predict_dist(model, x, to_resource(r));
                return py::make_tuple(d.mu, d.sigma);
            },
            py::arg("traffic"), py::arg("r"))
        .def(
            "sample_qos",
            [](const SliceModel& model, double x, const std::vector<double>& r, double eps) {
                return sample_qos_reparam(model, x, to_resource(r), eps);
            },
            py::arg("traffic"), py::arg("r"), py::arg("eps"))
        .def(
            "grad_qos",
            [](const SliceModel& model, double x, const std::vector<double>& r, double eps) {
                return grad_qos_wrt_r(model, x, to_resource(r), eps);
            },
            py::arg("traffic"), py::arg("r"), py::arg("eps"))
        .def(
            "metrics",
            [](const SliceModel& model, const QoSDataset& ds, const std::string& split) {
                const SplitMetrics sm = model_metrics(model, split_ptr_rows(ds, split));
                return py::make_tuple(sm.nll, sm.mse, sm.mae);
            },
            py::arg("dataset"), py::arg("split"))
        .def("save", &export_model, py::arg("path"));

    m.def("init_model", &init_model, py::arg("arch"), py::arg("seed"));
    m.def("train_model",
          [](SliceModel& model, const QoSDataset& ds, const TrainConfig& cfg) {
              train(model, ds, cfg);
          },
          py::arg("model"), py::arg("dataset"), py::arg("config"));
    m.def("load_model", &import_model, py::arg("path"));

    m.def(
        "beta_strict",
        [](const TrafficSeries& traffic, const std::vector<double>& qos, double q_thresh) {
            return beta_strict(traffic, qos, q_thresh);
        },
        py::arg("traffic"), py::arg("qos"), py::arg("q_thresh"));
    m.def(
        "beta_surrogate",
        [](const TrafficSeries& traffic, const std::vector<double>& qos, double q_thresh,
           double rho) { return beta_surrogate(traffic, qos, q_thresh, rho); },
        py::arg("traffic"), py::arg("qos"), py::arg("q_thresh"), py::arg("rho") = 5.0);
    m.def(
        "expected_beta",
        [](const SliceModel& model, const TrafficSeries& traffic, const std::vector<double>& r,
           double q_thresh, double rho, int n_mc, bool strict, std::uint64_t seed) {
            SurrogateConfig cfg{rho, n_mc};
            const auto panel = make_epsilon_panel(n_mc, static_cast<int>(traffic.tau()), seed);
            const BetaEstimate est =
                expected_beta(model, traffic, to_resource(r), q_thresh, cfg,
                              strict ? BetaMode::Strict : BetaMode::Surrogate, panel);
            return py::make_tuple(est.value, est.grad_r);
        },
        py::arg("model"), py::arg("traffic"), py::arg("r"), py::arg("q_thresh"),
        py::arg("rho") = 5.0, py::arg("n_mc") = 64, py::arg("strict") = false,
        py::arg("seed") = 0);

    py::class_<SurrogateConfig>(m, "SurrogateConfig")
        .def(py::init<>())
        .def_readwrite("rho", &SurrogateConfig::rho)
        .def_readwrite("n_mc", &SurrogateConfig::n_mc);

    py::class_<OptimizerConfig>(m, "OptimizerConfig")
        .def(py::init<>())
        .def_readwrite("alpha1", &OptimizerConfig::alpha1)
        .def_readwrite("alpha2", &OptimizerConfig::alpha2)
        .def_readwrite("alpha3", &OptimizerConfig::alpha3)
        .def_readwrite("tau1_max", &OptimizerConfig::tau1_max)
        .def_readwrite("tau2_max", &OptimizerConfig::tau2_max)
        .def_readwrite("eps1", &OptimizerConfig::eps1)
        .def_readwrite("eps2", &OptimizerConfig::eps2)
        .def_readwrite("n_init", &OptimizerConfig::n_init)
        .def_readwrite("surrogate", &OptimizerConfig::surrogate)
        .def_readwrite("n_restarts", &OptimizerConfig::n_restarts)
        .def_readwrite("nmc_outer", &OptimizerConfig::nmc_outer)
        .def_readwrite("nmc_cert", &OptimizerConfig::nmc_cert)
        .def_readwrite("polish", &OptimizerConfig::polish)
        .def_readwrite("polish_margin", &OptimizerConfig::polish_margin)
        .def_readwrite("seed", &OptimizerConfig::seed);

    py::class_<Solution>(m, "Solution")
        .def_property_readonly("allocations",
                               [](const Solution& s) {
                                   py::list out;
                                   for (const auto& r : s.allocations) out.append(r.values);
                                   return out;
                               })
        .def_readonly("feasible", &Solution::feasible)
        .def_readonly("cost", &Solution::cost)
        .def_readonly("certified_beta", &Solution::certified_beta)
        .def_readonly("lb_history", &Solution::lb_history)
        .def_readonly("ub_history", &Solution::ub_history)
        .def_readonly("outer_iterations", &Solution::outer_iterations)
        .def_readonly("wall_time_s", &Solution::wall_time_s);

    // Single-slice convenience drivers; slice models and the oracle-as-model
    // variant cover the experiment and the noiseless toy problems.
    m.def(
        "optimize_slice",
        [](const SliceModel& model, const TrafficSeries& traffic, const SlaSpec& sla,
           const OptimizerConfig& cfg) {
            Problem problem;
            problem.slices.push_back({&model, traffic, sla});
            return optimize(problem, cfg);
        },
        py::arg("model"), py::arg("traffic"), py::arg("sla"),
        py::arg("config") = OptimizerConfig{});
    m.def(
        "optimize_oracle_slice",
        [](const OracleParams& params, const TrafficSeries& traffic, const SlaSpec& sla,
           const OptimizerConfig& cfg) {
            OracleMeanModel model(params);
            Problem problem;
            problem.slices.push_back({&model, traffic, sla});
            return optimize(problem, cfg);
        },
        py::arg("params"), py::arg("traffic"), py::arg("sla"),
        py::arg("config") = OptimizerConfig{});
    m.def(
        "scalar_variant_slice",
        [](const SliceModel& model, const TrafficSeries& traffic, const SlaSpec& sla,
           const OptimizerConfig& cfg, int k_sigma) {
            Problem problem;
            problem.slices.push_back({&model, traffic, sla});
            return scalar_variant_optimize(problem, cfg, k_sigma);
        },
        py::arg("model"), py::arg("traffic"), py::arg("sla"),
        py::arg("config") = OptimizerConfig{}, py::arg("k_sigma") = 0);

    py::class_<SearchGrid>(m, "SearchGrid")
        .def(py::init<>())
        .def_readwrite("cpu_range", &SearchGrid::cpu_range)
        .def_readwrite("bw_range", &SearchGrid::bw_range);

    m.def(
        "grid_optimum",
        [](const TrafficSeries& traffic, const SearchGrid& grid, const SlaSpec& sla,
           const OracleParams& params, int n_trials, std::uint64_t seed) {
            const auto evaluator = make_oracle_evaluator(params, n_trials, seed);
            return grid_optimum(evaluator, traffic, grid, sla, CostWeights()).values;
        },
        py::arg("traffic"), py::arg("grid"), py::arg("sla"), py::arg("params") = OracleParams{},
        py::arg("n_trials") = 200, py::arg("seed") = 0);
    m.def(
        "peak_alloc",
        [](double peak_traffic, const SearchGrid& grid, const SlaSpec& sla,
           const OracleParams& params, int n_trials, std::uint64_t seed, std::size_t tau) {
            const auto evaluator = make_oracle_evaluator(params, n_trials, seed);
            return peak_alloc(evaluator, peak_traffic, grid, sla, CostWeights(), tau).values;
        },
        py::arg("peak_traffic"), py::arg("grid"), py::arg("sla"),
        py::arg("params") = OracleParams{}, py::arg("n_trials") = 200, py::arg("seed") = 0,
        py::arg("tau") = 300);

    py::class_<TraceStats>(m, "TraceStats")
        .def_readonly("sigma_mean", &TraceStats::sigma_mean)
        .def_readonly("sigma_max", &TraceStats::sigma_max);

    py::class_<TrafficDistribution>(m, "TrafficDistribution")
        .def(py::init([](double center, double std) {
                 return TrafficDistribution{center, std};
             }),
             py::arg("center"), py::arg("std"))
        .def_readwrite("center", &TrafficDistribution::center)
        .def_readwrite("std", &TrafficDistribution::std)
        .def("upper", &TrafficDistribution::upper);

    m.def("ingest_trace_csv", &ingest_trace_csv, py::arg("path"),
          py::arg("peak_users_per_s") = 5.0);
    m.def(
        "synth_weekly_trace_csv",
        [](const std::string& path, std::uint64_t seed, double amplitude, double noise) {
            write_trace_csv(synth_weekly_trace(seed, amplitude, noise), path);
        },
        py::arg("path"), py::arg("seed") = 0, py::arg("amplitude") = 1.0,
        py::arg("noise") = 0.05);
    m.def("sample_traffic_series", &sample_traffic_series, py::arg("dist"), py::arg("tau"),
          py::arg("seed") = 0);

    m.def(
        "write_dataset_csv",
        [](const QoSDataset& ds, const std::string& split, const std::string& path) {
            write_dataset_csv(ds, split_from_name(split), path);
        },
        py::arg("dataset"), py::arg("split"), py::arg("path"));
    m.def("read_dataset_csv", &read_dataset_csv, py::arg("paths"));
}
