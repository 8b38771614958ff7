#pragma once

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "horizon/config.hpp"
#include "horizon/errors.hpp"

namespace horizon {

// Fixed %.12g formatting so identical configs reproduce output byte for byte.
inline std::string fmt_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline const char* mode_label_legend() {
    return "u,uo,mo,lo,l,nl,no,nu = global modes in decreasing lab frequency; "
           "suffix L/R = side of the defining local mode; c = complex (evanescent, unphysical); "
           "labels above the upper subluminal edge follow the descending-frequency rule, so the "
           "surviving positive-norm optical mode there is lo";
}

class CsvWriter {
  public:
    CsvWriter(const std::string& path, const RunConfig& cfg, const std::string& units_note)
        : out_(path) {
        if (!out_) throw ConfigError("cannot open output file " + path);
        char hash[32];
        std::snprintf(hash, sizeof(hash), "%016" PRIx64, fnv1a(canonical_config(cfg)));
        out_ << "# config_hash: " << hash << "\n";
        out_ << "# units: " << units_note << "\n";
        out_ << "# mode_legend: " << mode_label_legend() << "\n";
        out_ << "# lab contributions: optical out modes noL,uoL,loL,moR only (non-optical "
                "out modes carry negligible flux in the optical window)\n";
    }

    void header(const std::vector<std::string>& cols) {
        for (size_t i = 0; i < cols.size(); ++i) out_ << (i ? "," : "") << cols[i];
        out_ << "\n";
    }

    void row(const std::vector<std::string>& cells) {
        for (size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << "\n";
    }

  private:
    std::ofstream out_;
};

}  // namespace horizon
