#include "arrowid/report.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "arrowid/csvio.hpp"
#include "text_format.hpp"

namespace arrowid {

namespace {

using detail::append_double;
using detail::strf;
using json = nlohmann::ordered_json;

constexpr const char* kMachineMarker = "--- machine ---";

ModelKind kind_from_string(const std::string& name) {
    if (name == "no-zero") return ModelKind::NoZero;
    if (name == "one-zero") return ModelKind::OneZero;
    if (name == "zero-pair") return ModelKind::ZeroPair;
    throw std::invalid_argument("unknown model kind '" + name + "'");
}

json fit_to_json(const FitRecord& fit) {
    json j;
    j["gain_m_per_N"] = fit.model.gain;
    j["zeta"] = fit.model.zeta;
    j["omega_rad_s"] = fit.model.omega;
    if (fit.model.kind == ModelKind::OneZero) j["zero_rad_s"] = fit.model.zero;
    if (fit.model.kind == ModelKind::ZeroPair) {
        j["zero_freq_rad_s"] = fit.model.zero_freq;
        j["zero_damping"] = fit.model.zero_damping;
    }
    j["vaf_percent"] = fit.vaf_percent;
    j["iterations"] = fit.iterations;
    j["converged"] = fit.converged;
    return j;
}

FitRecord fit_from_json(const std::string& kind_name, const json& j) {
    FitRecord fit;
    fit.model.kind = kind_from_string(kind_name);
    fit.model.gain = j.at("gain_m_per_N").get<double>();
    fit.model.zeta = j.at("zeta").get<double>();
    fit.model.omega = j.at("omega_rad_s").get<double>();
    if (fit.model.kind == ModelKind::OneZero) fit.model.zero = j.at("zero_rad_s").get<double>();
    if (fit.model.kind == ModelKind::ZeroPair) {
        fit.model.zero_freq = j.at("zero_freq_rad_s").get<double>();
        fit.model.zero_damping = j.at("zero_damping").get<double>();
    }
    fit.vaf_percent = j.at("vaf_percent").get<double>();
    fit.iterations = j.at("iterations").get<int>();
    fit.converged = j.at("converged").get<bool>();
    return fit;
}

json aggregate_to_json(const TrialAggregate& a) {
    return json{{"mean", a.mean}, {"half_range", a.half_range}};
}

TrialAggregate aggregate_from_json(const json& j) {
    return {j.at("mean").get<double>(), j.at("half_range").get<double>()};
}

bool requested(const std::vector<ModelKind>& kinds, ModelKind kind) {
    for (const ModelKind k : kinds)
        if (k == kind) return true;
    return false;
}

// A wide-open zero (three decades above the pole) degenerates a richer kind
// to the plain resonance, so restarting from the no-zero optimum guarantees
// the richer fit can only improve on it.
SecondOrderModel degenerate_from(const SecondOrderModel& no_zero, ModelKind kind) {
    SecondOrderModel init = no_zero;
    init.kind = kind;
    if (kind == ModelKind::OneZero) init.zero = 1e6 * no_zero.omega;
    if (kind == ModelKind::ZeroPair) {
        init.zero_freq = 1e6 * no_zero.omega;
        init.zero_damping = 0.3;
    }
    return init;
}

// A heavily damped far pair with zc = 1.9 z, xi = 0.95 reproduces a single
// real zero's in-band lead (2 xi s / zc = s / z), so the pair fit can start
// where the one-zero optimum left off.
SecondOrderModel pair_from_one_zero(const SecondOrderModel& one_zero) {
    SecondOrderModel init = one_zero;
    init.kind = ModelKind::ZeroPair;
    init.zero = 0.0;
    init.zero_freq = 1.9 * one_zero.zero;
    init.zero_damping = 0.95;
    return init;
}

void identify_one(DatasetReport& dr, const Dataset& raw, const RunOptions& options) {
    Dataset data = raw;
    data.force *= options.force_scale;
    validate(data, dr.name.c_str());

    dr.samples = data.force.size();
    dr.dt = data.dt;
    dr.taps = std::min<Index>(options.n_taps, dr.samples);

    const ImpulseResponseEstimate fir = estimate_fir(data, dr.taps, options.detrend);
    dr.nonparametric_vaf_percent = nonparametric_vaf(data, fir);
    const SecondOrderModel guess = initial_guess(fir);
    const SecondOrderModel robust_guess = step_response_guess(fir);

    std::optional<FitResult> no_zero_fit;
    std::optional<FitResult> one_zero_fit;
    for (const ModelKind kind : {ModelKind::NoZero, ModelKind::OneZero, ModelKind::ZeroPair}) {
        if (!requested(options.kinds, kind)) continue;
        std::vector<SecondOrderModel> inits = {guess, robust_guess};
        if (kind != ModelKind::NoZero && no_zero_fit)
            inits.push_back(degenerate_from(no_zero_fit->model, kind));
        if (kind == ModelKind::ZeroPair && one_zero_fit && one_zero_fit->model.zero > 0.0)
            inits.push_back(pair_from_one_zero(one_zero_fit->model));
        std::optional<FitResult> best;
        for (const SecondOrderModel& init : inits) {
            const FitResult fit = fit_parametric(data, kind, init);
            if (!best || fit.vaf_percent > best->vaf_percent) best = fit;
        }
        if (kind == ModelKind::NoZero) no_zero_fit = best;
        if (kind == ModelKind::OneZero) one_zero_fit = best;
        dr.fits[to_string(kind)] =
            FitRecord{best->model, best->vaf_percent, best->iterations, best->converged};
    }

    if (no_zero_fit && no_zero_fit->model.gain > 0.0) {
        dr.lumped = extract_lumped(no_zero_fit->model);
        dr.freq_hz = no_zero_fit->model.omega / (2.0 * M_PI);
    }
}

}  // namespace

ReportRecord run_identify(const std::vector<std::string>& names,
                          const std::vector<Dataset>& datasets, const RunOptions& options) {
    if (datasets.empty()) throw std::invalid_argument("run_identify: no datasets");
    if (names.size() != datasets.size())
        throw std::invalid_argument("run_identify: names and datasets differ in length");
    if (options.kinds.empty()) throw std::invalid_argument("run_identify: no model kinds");
    if (!std::isfinite(options.force_scale) || options.force_scale == 0.0)
        throw std::invalid_argument("run_identify: force_scale must be finite and nonzero");
    if (options.n_taps < 1) throw std::invalid_argument("run_identify: n_taps must be >= 1");

    ReportRecord record;
    for (size_t i = 0; i < datasets.size(); ++i) {
        DatasetReport dr;
        dr.name = names[i];
        try {
            identify_one(dr, datasets[i], options);
        } catch (const std::exception& e) {
            dr.error = e.what();
        }
        record.datasets.push_back(std::move(dr));
    }

    std::vector<double> freq, zeta, mass, damping, stiffness;
    for (const DatasetReport& dr : record.datasets) {
        if (!dr.lumped || !dr.freq_hz) continue;
        freq.push_back(*dr.freq_hz);
        zeta.push_back(dr.fits.at(to_string(ModelKind::NoZero)).model.zeta);
        mass.push_back(dr.lumped->mass_kg);
        damping.push_back(dr.lumped->damping_Ns_per_m);
        stiffness.push_back(dr.lumped->stiffness_N_per_m);
    }
    if (freq.size() >= 2) {
        ReportAggregates agg;
        agg.freq_hz = aggregate_trials(freq);
        agg.zeta = aggregate_trials(zeta);
        agg.mass_kg = aggregate_trials(mass);
        agg.damping_Ns_per_m = aggregate_trials(damping);
        agg.stiffness_N_per_m = aggregate_trials(stiffness);
        record.aggregates = agg;
    }
    return record;
}

ReportRecord run_identify(const std::vector<std::string>& paths, const RunOptions& options) {
    if (paths.empty()) throw std::invalid_argument("run_identify: no datasets");
    std::vector<Dataset> datasets(paths.size());
    std::vector<std::string> load_errors(paths.size());
    for (size_t i = 0; i < paths.size(); ++i) {
        try {
            datasets[i] = load_dataset(paths[i]);
        } catch (const std::exception& e) {
            load_errors[i] = e.what();
            datasets[i] = Dataset{1.0, Vector::Zero(2), Vector::Zero(2)};  // placeholder
        }
    }
    ReportRecord record = run_identify(paths, datasets, options);
    for (size_t i = 0; i < paths.size(); ++i) {
        if (!load_errors[i].empty()) {
            record.datasets[i] = DatasetReport{};
            record.datasets[i].name = paths[i];
            record.datasets[i].error = load_errors[i];
        }
    }
    return record;
}

std::string format_report(const ReportRecord& record) {
    std::string out = "arrowid identification report\n";

    for (const DatasetReport& dr : record.datasets) {
        out += "\ndataset: " + dr.name + "\n";
        if (!dr.error.empty()) {
            out += "  error: " + dr.error + "\n";
            continue;
        }
        out += strf("  samples: %lld  dt_s: %.9g  taps: %lld\n",
                    static_cast<long long>(dr.samples), dr.dt, static_cast<long long>(dr.taps));
        out += strf("  nonparametric_vaf_percent: %.4f\n", dr.nonparametric_vaf_percent);
        for (const auto& [kind_name, fit] : dr.fits) {
            out += strf("  model %-9s gain_m_per_N: %.6e  zeta: %.6g  omega_rad_s: %.6g",
                        kind_name.c_str(), fit.model.gain, fit.model.zeta, fit.model.omega);
            if (fit.model.kind == ModelKind::OneZero)
                out += strf("  zero_rad_s: %.6g", fit.model.zero);
            if (fit.model.kind == ModelKind::ZeroPair)
                out += strf("  zero_freq_rad_s: %.6g  zero_damping: %.6g", fit.model.zero_freq,
                            fit.model.zero_damping);
            out += strf("  vaf_percent: %.4f  iterations: %d  converged: %s\n", fit.vaf_percent,
                        fit.iterations, fit.converged ? "yes" : "no");
        }
        if (dr.lumped && dr.freq_hz) {
            out += strf("  mass_kg: %.6e  damping_Ns_per_m: %.6e  stiffness_N_per_m: %.6e\n",
                        dr.lumped->mass_kg, dr.lumped->damping_Ns_per_m,
                        dr.lumped->stiffness_N_per_m);
            out += strf("  freq_hz: %.4f\n", *dr.freq_hz);
        }
    }

    if (record.aggregates) {
        const ReportAggregates& a = *record.aggregates;
        out += "\naggregates:\n";
        const auto line = [&](const char* label, const TrialAggregate& agg) {
            out += strf("  %s: %.6g +/- %.6g\n", label, agg.mean, agg.half_range);
        };
        line("freq_hz", a.freq_hz);
        line("zeta", a.zeta);
        line("mass_kg", a.mass_kg);
        line("damping_Ns_per_m", a.damping_Ns_per_m);
        line("stiffness_N_per_m", a.stiffness_N_per_m);
    }

    json machine;
    machine["datasets"] = json::array();
    for (const DatasetReport& dr : record.datasets) {
        json jd;
        jd["name"] = dr.name;
        if (!dr.error.empty()) {
            jd["error"] = dr.error;
            machine["datasets"].push_back(std::move(jd));
            continue;
        }
        jd["samples"] = static_cast<long long>(dr.samples);
        jd["dt_s"] = dr.dt;
        jd["taps"] = static_cast<long long>(dr.taps);
        jd["nonparametric_vaf_percent"] = dr.nonparametric_vaf_percent;
        jd["fits"] = json::object();
        for (const auto& [kind_name, fit] : dr.fits) jd["fits"][kind_name] = fit_to_json(fit);
        if (dr.lumped) {
            jd["lumped"] = json{{"mass_kg", dr.lumped->mass_kg},
                                {"damping_Ns_per_m", dr.lumped->damping_Ns_per_m},
                                {"stiffness_N_per_m", dr.lumped->stiffness_N_per_m}};
        }
        if (dr.freq_hz) jd["freq_hz"] = *dr.freq_hz;
        machine["datasets"].push_back(std::move(jd));
    }
    if (record.aggregates) {
        const ReportAggregates& a = *record.aggregates;
        machine["aggregates"] = json{{"freq_hz", aggregate_to_json(a.freq_hz)},
                                     {"zeta", aggregate_to_json(a.zeta)},
                                     {"mass_kg", aggregate_to_json(a.mass_kg)},
                                     {"damping_Ns_per_m", aggregate_to_json(a.damping_Ns_per_m)},
                                     {"stiffness_N_per_m", aggregate_to_json(a.stiffness_N_per_m)}};
    }

    out += "\n";
    out += kMachineMarker;
    out += "\n";
    out += machine.dump(2);
    out += "\n";
    return out;
}

void write_report(const std::string& path, const ReportRecord& record) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw parse_error(path + ": cannot open for writing");
    out << format_report(record);
    if (!out) throw parse_error(path + ": write failed");
}

ReportRecord load_report(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw parse_error(path + ": cannot open");
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();

    const std::string marker = std::string(kMachineMarker) + "\n";
    const size_t pos = text.find(marker);
    if (pos == std::string::npos) throw parse_error(path + ": machine section marker not found");

    json machine;
    try {
        machine = json::parse(text.substr(pos + marker.size()));
    } catch (const json::exception& e) {
        throw parse_error(path + ": bad machine section: " + e.what());
    }

    try {
        ReportRecord record;
        for (const json& jd : machine.at("datasets")) {
            DatasetReport dr;
            dr.name = jd.at("name").get<std::string>();
            if (jd.contains("error")) {
                dr.error = jd.at("error").get<std::string>();
                record.datasets.push_back(std::move(dr));
                continue;
            }
            dr.samples = jd.at("samples").get<long long>();
            dr.dt = jd.at("dt_s").get<double>();
            dr.taps = jd.at("taps").get<long long>();
            dr.nonparametric_vaf_percent = jd.at("nonparametric_vaf_percent").get<double>();
            for (const auto& [kind_name, jfit] : jd.at("fits").items())
                dr.fits[kind_name] = fit_from_json(kind_name, jfit);
            if (jd.contains("lumped")) {
                LumpedParams lumped;
                lumped.mass_kg = jd.at("lumped").at("mass_kg").get<double>();
                lumped.damping_Ns_per_m = jd.at("lumped").at("damping_Ns_per_m").get<double>();
                lumped.stiffness_N_per_m = jd.at("lumped").at("stiffness_N_per_m").get<double>();
                dr.lumped = lumped;
            }
            if (jd.contains("freq_hz")) dr.freq_hz = jd.at("freq_hz").get<double>();
            record.datasets.push_back(std::move(dr));
        }
        if (machine.contains("aggregates")) {
            const json& ja = machine.at("aggregates");
            ReportAggregates agg;
            agg.freq_hz = aggregate_from_json(ja.at("freq_hz"));
            agg.zeta = aggregate_from_json(ja.at("zeta"));
            agg.mass_kg = aggregate_from_json(ja.at("mass_kg"));
            agg.damping_Ns_per_m = aggregate_from_json(ja.at("damping_Ns_per_m"));
            agg.stiffness_N_per_m = aggregate_from_json(ja.at("stiffness_N_per_m"));
            record.aggregates = agg;
        }
        return record;
    } catch (const json::exception& e) {
        throw parse_error(path + ": bad machine section: " + e.what());
    }
}

ConditionRecord condition_from_report(const ReportRecord& record) {
    if (record.aggregates) {
        const ReportAggregates& a = *record.aggregates;
        return {a.freq_hz.mean, a.zeta.mean, a.mass_kg.mean, a.damping_Ns_per_m.mean,
                a.stiffness_N_per_m.mean};
    }
    for (const DatasetReport& dr : record.datasets) {
        if (!dr.lumped || !dr.freq_hz) continue;
        const auto it = dr.fits.find(to_string(ModelKind::NoZero));
        if (it == dr.fits.end()) continue;
        return {*dr.freq_hz, it->second.model.zeta, dr.lumped->mass_kg,
                dr.lumped->damping_Ns_per_m, dr.lumped->stiffness_N_per_m};
    }
    throw std::invalid_argument("condition_from_report: report carries no lumped parameters");
}

namespace {

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw parse_error(path + ": cannot open for writing");
    out << content;
    if (!out) throw parse_error(path + ": write failed");
}

}  // namespace

void emit_plot_data(const IdentifyArtifacts& artifacts, PlotKind kind, const std::string& path) {
    const bool needs_fit = kind == PlotKind::Impulse || kind == PlotKind::Prediction ||
                           kind == PlotKind::Bode || kind == PlotKind::PoleZero;
    if (needs_fit && !artifacts.fit)
        throw std::invalid_argument("emit_plot_data: no parametric fit available");
    if (kind == PlotKind::Sensitivity && artifacts.sweeps.empty())
        throw std::invalid_argument("emit_plot_data: no sensitivity sweeps available");

    std::string out;
    switch (kind) {
        case PlotKind::Impulse: {
            if (artifacts.fir.taps.size() < 1 || !(artifacts.fir.dt > 0.0))
                throw std::invalid_argument("emit_plot_data: no impulse-response estimate");
            out = "t_s,fir_m_per_Ns,model_m_per_Ns\n";
            for (Index k = 0; k < artifacts.fir.taps.size(); ++k) {
                const double t = static_cast<double>(k) * artifacts.fir.dt;
                append_double(out, t);
                out.push_back(',');
                append_double(out, artifacts.fir.taps[k]);
                out.push_back(',');
                append_double(out, impulse_response(artifacts.fit->model, t));
                out.push_back('\n');
            }
            break;
        }
        case PlotKind::Prediction: {
            validate(artifacts.data, "emit_plot_data: data");
            const TimeSeries force{artifacts.data.dt, artifacts.data.force};
            const Vector parametric = simulate_zoh(artifacts.fit->model, force).values;
            const Vector nonparametric =
                convolve(force, artifacts.fir.taps, artifacts.data.dt).values;
            out = "t_s,measured_m,parametric_m,nonparametric_m\n";
            for (Index n = 0; n < artifacts.data.force.size(); ++n) {
                append_double(out, static_cast<double>(n) * artifacts.data.dt);
                out.push_back(',');
                append_double(out, artifacts.data.displacement[n]);
                out.push_back(',');
                append_double(out, parametric[n]);
                out.push_back(',');
                append_double(out, nonparametric[n]);
                out.push_back('\n');
            }
            break;
        }
        case PlotKind::Bode: {
            const double w0 = artifacts.fit->model.omega;
            const Index points = 400;
            Vector grid(points);
            for (Index i = 0; i < points; ++i)
                grid[i] = w0 * std::pow(10.0, -2.0 + 4.0 * static_cast<double>(i) /
                                                          static_cast<double>(points - 1));
            const BodeData data = bode(artifacts.fit->model, grid);
            out = "freq_rad_s,magnitude,phase_rad\n";
            for (Index i = 0; i < points; ++i) {
                append_double(out, data.frequencies[i]);
                out.push_back(',');
                append_double(out, data.magnitude[i]);
                out.push_back(',');
                append_double(out, data.phase_rad[i]);
                out.push_back('\n');
            }
            break;
        }
        case PlotKind::PoleZero: {
            const TransferFunctionShape shape = transfer_function(artifacts.fit->model);
            out = "kind,re,im\n";
            for (const auto& p : shape.poles) {
                out += "pole,";
                append_double(out, p.real());
                out.push_back(',');
                append_double(out, p.imag());
                out.push_back('\n');
            }
            for (const auto& z : shape.zeros) {
                out += "zero,";
                append_double(out, z.real());
                out.push_back(',');
                append_double(out, z.imag());
                out.push_back('\n');
            }
            break;
        }
        case PlotKind::Sensitivity: {
            out = "parameter,value,vaf_percent\n";
            for (const SensitivityCurve& curve : artifacts.sweeps) {
                for (Index i = 0; i < curve.grid.size(); ++i) {
                    out += to_string(curve.parameter);
                    out.push_back(',');
                    append_double(out, curve.grid[i]);
                    out.push_back(',');
                    append_double(out, curve.vaf_percent[i]);
                    out.push_back('\n');
                }
            }
            break;
        }
    }
    write_text(path, out);
}

}  // namespace arrowid
