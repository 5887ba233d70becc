#pragma once

#include <ostream>
#include <sstream>

#include "levykit/bounds.hpp"
#include "levykit/exponent.hpp"

namespace levykit {

// ---------------------------------------------------------------------------
// CSV emission.  Fixed 17-significant-digit formatting and fixed row order:
// identical inputs produce byte-identical output.
// ---------------------------------------------------------------------------

class CsvWriter {
  public:
    explicit CsvWriter(std::ostream& os) : os_(os) {}

    void header(const std::vector<std::string>& cols) {
        for (std::size_t i = 0; i < cols.size(); ++i) os_ << (i ? "," : "") << cols[i];
        os_ << "\n";
    }
    void row(const std::vector<double>& vals) {
        for (std::size_t i = 0; i < vals.size(); ++i)
            os_ << (i ? "," : "") << format_g17(vals[i]);
        os_ << "\n";
    }
    void mixed_row(const std::vector<std::string>& vals) {
        for (std::size_t i = 0; i < vals.size(); ++i) os_ << (i ? "," : "") << vals[i];
        os_ << "\n";
    }
    void verdict(const std::string& name, bool pass, const std::string& detail = "") {
        os_ << "VERDICT," << name << "," << (pass ? "pass" : "fail");
        if (!detail.empty()) os_ << "," << detail;
        os_ << "\n";
    }

  private:
    std::ostream& os_;
};

inline void write_condition_a_csv(std::ostream& os, const ConditionAReport& rep) {
    CsvWriter w(os);
    w.header({"r", "sup_psi_u", "inf_psi_l", "ratio"});
    for (const auto& r : rep.rows) w.row({r.r, r.sup_psi_u, r.inf_psi_l, r.ratio});
    std::ostringstream detail;
    detail << "beta_hat=" << format_g17(rep.beta_hat) << ";worst_r=" << format_g17(rep.worst_r)
           << ";witness_dir=";
    for (int d = 0; d < rep.inf_direction.dim(); ++d)
        detail << (d ? "|" : "") << format_g17(rep.inf_direction[d]);
    w.verdict("condition_a", rep.passed, detail.str());
}

inline void write_bound_report_csv(std::ostream& os, const BoundReport& rep) {
    CsvWriter w(os);
    std::vector<std::string> cols{"t", "rho"};
    for (const auto& [k, v] : rep.constants) cols.push_back(k);
    cols.push_back("worst_ratio");
    cols.push_back("margin");
    for (int d = 0; d < (rep.rows.empty() ? 0 : rep.rows.front().worst_point.dim()); ++d)
        cols.push_back("worst_x" + std::to_string(d + 1));
    w.header(cols);
    for (const auto& r : rep.rows) {
        std::vector<double> vals{r.t, r.rho};
        for (const auto& [k, v] : rep.constants) vals.push_back(v);
        vals.push_back(r.worst_ratio);
        vals.push_back(r.margin);
        for (int d = 0; d < r.worst_point.dim(); ++d) vals.push_back(r.worst_point[d]);
        w.row(vals);
    }
    std::ostringstream detail;
    for (const auto& [k, v] : rep.constants) detail << k << "=" << format_g17(v) << ";";
    if (!rep.note.empty()) detail << "note=" << rep.note;
    w.verdict(rep.op + ":" + rep.direction + ":" + rep.shape, rep.verdict, detail.str());
}

}  // namespace levykit
