#pragma once

#include <string>
#include <vector>

#include "gapfield/analysis.hpp"

namespace gapfield {

// Frozen column set: downstream tooling parses these names in this order.
inline constexpr const char* kSweepCsvHeader =
    "eps,k1,k2,grad_X1,grad_X2,sup_norm,lower_factor,upper_factor,terms_used,"
    "ratio_low,ratio_up";

// CSV serialization of a sweep: the frozen header, one row per solve in
// report order (failed rows print nan fields), then '#' footer lines with the
// fitted slope, the ratio spreads, any per-row failure messages, and the
// exact config document the sweep ran from (so a rerun can be reproduced from
// the file alone). When oracle_errs is supplied (one entry per row, nan for
// rows without a comparison) an oracle_err column is appended after the
// frozen columns.
std::string sweep_csv(const SweepReport& report, const std::string& config_json,
                      const std::vector<double>* oracle_errs = nullptr);

// Two-panel self-contained SVG: log-log |grad u| at the first closest point
// against eps with the fitted slope annotated, and the |grad u| profile
// across the gap for the smallest eps solved. Needs at least two successful
// rows with positive gradients.
std::string render_plot_svg(const SweepReport& report);
void emit_plot(const SweepReport& report, const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace gapfield
