// Published (model AUC, baseline AUC, RelaImpr %) rows used to pin the metric.
#pragma once

#include <array>

namespace egin::testing {

struct RelaImprRow {
  const char* name;
  double auc_model;
  double auc_base;
  double expected_pct;
};

inline constexpr std::array<RelaImprRow, 11> kRelaImprRows{{
    {"public DNN", 0.8709, 0.8715, -0.16},
    {"public DNN-cross", 0.8715, 0.8715, 0.00},
    {"public DIN", 0.8833, 0.8715, 3.18},
    {"public BST", 0.9040, 0.8715, 8.75},
    {"public EGIN", 0.9184, 0.8715, 12.62},
    {"industrial DNN", 0.7011, 0.7017, -0.30},
    {"industrial DNN-cross", 0.7017, 0.7017, 0.00},
    {"industrial DIN", 0.7022, 0.7017, 0.25},
    {"industrial BST", 0.7042, 0.7017, 1.24},
    {"industrial EGES", 0.7079, 0.7017, 3.07},
    {"industrial EGIN", 0.7108, 0.7017, 4.51},
}};

}  // namespace egin::testing
