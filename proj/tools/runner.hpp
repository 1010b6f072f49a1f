#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"

namespace sfe::cli {

enum class Status { pass, fail, not_applicable };
const char* to_string(Status s);

struct Verdict {
    std::string suite;
    std::string name;
    Status status = Status::not_applicable;
    double witness = 0.0;    // the measured quantity
    double reference = 0.0;  // what it is compared against
    std::string detail;
};

struct Headline {
    std::string suite;
    std::string name;
    double rate = 0.0;  // reported (clamped at 0)
    double raw_rate = 0.0;
    double residual = 0.0;
    double t_min = 0.0;
    double t_max = 0.0;
};

enum class Mode { run, verify };

struct RunSummary {
    std::string model;
    Mode mode = Mode::run;
    std::vector<Headline> headlines;
    std::vector<Verdict> verdicts;
    std::vector<std::string> diagnostics;
    double wall_seconds = 0.0;

    bool any_fail() const;
};

// Executes the selected suites and writes every artifact into cfg.output_dir.
RunSummary execute(const ExperimentConfig& cfg, Mode mode);

// Deterministic: no timings.
void write_summary_csv(std::ostream& os, const RunSummary& s);
std::string format_summary(const RunSummary& s);

}  // namespace sfe::cli
