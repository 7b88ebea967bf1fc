#pragma once

#include <span>
#include <vector>

namespace bnet {

// Mann-Whitney AUC with the ties-count-half convention. Throws when labels
// are single-class.
double auc(std::span<const double> scores, std::span<const int> labels);

struct ClassificationMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Standard definitions; 0/0 cases resolve to 0 (e.g. precision with no
// positive predictions).
ClassificationMetrics classification_metrics(std::span<const int> pred,
                                             std::span<const int> labels,
                                             int positive_class = 1);

double median(std::vector<double> values);

}  // namespace bnet
