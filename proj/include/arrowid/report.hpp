#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "arrowid/estimation.hpp"
#include "arrowid/types.hpp"

namespace arrowid {

/// Options for one identification run over a batch of dataset files.
struct RunOptions {
    std::vector<ModelKind> kinds = {ModelKind::NoZero, ModelKind::OneZero, ModelKind::ZeroPair};
    Index n_taps = kDefaultTapCount;
    double force_scale = 1.0;  // multiplies the force channel on load
    bool detrend = false;
};

/// One fitted model, flattened to report fields.
struct FitRecord {
    SecondOrderModel model;
    double vaf_percent = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Everything identified from a single dataset. `fits` is keyed by the model
/// kind name so iteration order is stable. When the no-zero fit exists and
/// has positive gain, `lumped` and `freq_hz` are filled from it.
struct DatasetReport {
    std::string name;
    Index samples = 0;
    double dt = 0.0;
    Index taps = 0;
    double nonparametric_vaf_percent = 0.0;
    std::map<std::string, FitRecord> fits;
    std::optional<LumpedParams> lumped;
    std::optional<double> freq_hz;
    std::string error;  // nonempty when this dataset failed; other fields unset
};

/// Aggregates across the datasets of one run (present with two or more
/// successful datasets that produced lumped parameters).
struct ReportAggregates {
    TrialAggregate freq_hz;
    TrialAggregate zeta;
    TrialAggregate mass_kg;
    TrialAggregate damping_Ns_per_m;
    TrialAggregate stiffness_N_per_m;
};

struct ReportRecord {
    std::vector<DatasetReport> datasets;
    std::optional<ReportAggregates> aggregates;
};

/// Runs the full pipeline (FIR estimate, parametric fits, lumped extraction,
/// aggregation) over named, already-loaded datasets. A failure in one dataset
/// is recorded in its entry and does not abort the batch. Throws
/// std::invalid_argument on an empty batch.
ReportRecord run_identify(const std::vector<std::string>& names,
                          const std::vector<Dataset>& datasets, const RunOptions& options = {});

/// Convenience overload: loads each path with load_dataset first. Load
/// failures are recorded per dataset like any other.
ReportRecord run_identify(const std::vector<std::string>& paths,
                          const RunOptions& options = {});

/// Renders the report: a human-readable summary followed by a `--- machine ---`
/// marker line and a JSON document with every numeric field in exact
/// round-trip form. Rendering the same record twice yields identical bytes.
std::string format_report(const ReportRecord& record);

void write_report(const std::string& path, const ReportRecord& record);

/// Parses the machine section back into a ReportRecord; numeric fields are
/// recovered exactly. Throws parse_error when the marker or JSON is missing
/// or malformed.
ReportRecord load_report(const std::string& path);

/// Collapses a report to the five comparison fields, using the aggregate
/// means when present and the sole dataset's values otherwise. Throws
/// std::invalid_argument when the report has no lumped parameters to compare.
ConditionRecord condition_from_report(const ReportRecord& record);

/// Plot-ready CSV extraction from one identification run.
struct IdentifyArtifacts {
    Dataset data;
    ImpulseResponseEstimate fir;
    std::optional<FitResult> fit;
    std::vector<SensitivityCurve> sweeps;
};

enum class PlotKind { Impulse, Prediction, Bode, PoleZero, Sensitivity };

/// Writes the series for one plot kind as CSV. Throws std::invalid_argument
/// when the artifacts lack the series the plot needs (no fit for the
/// model-based plots, no sweeps for Sensitivity).
void emit_plot_data(const IdentifyArtifacts& artifacts, PlotKind kind, const std::string& path);

}  // namespace arrowid
