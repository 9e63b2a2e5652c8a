#include "yseg/metrics.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "yseg/data.hpp"
#include "yseg/distance.hpp"
#include "yseg/error.hpp"

namespace yseg {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_same_size(const LabelMap& a, const LabelMap& b, const char* op) {
  if (a.height != b.height || a.width != b.width) {
    throw_shape_mismatch(op, {a.height, a.width}, {b.height, b.width});
  }
}

}  // namespace

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t t = 0;
  for (std::uint64_t c : counts) t += c;
  return t;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  require(other.num_classes == num_classes, ErrorCode::invalid_argument,
          "confusion: class counts differ");
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
  return *this;
}

ConfusionMatrix confusion(const LabelMap& pred, const LabelMap& gt, int num_classes) {
  check_same_size(pred, gt, "confusion");
  ConfusionMatrix m(num_classes);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const int g = gt.labels[i];
    if (g == kIgnore) continue;
    const int p = pred.labels[i];
    require(g < num_classes && p < num_classes, ErrorCode::invalid_argument,
            "confusion: label " + std::to_string(std::max(g, p)) + " >= L = " +
                std::to_string(num_classes));
    ++m.counts[static_cast<std::size_t>(g) * num_classes + p];
  }
  return m;
}

IouResult miou(const ConfusionMatrix& m, bool include_background) {
  const int l = m.num_classes;
  IouResult r;
  r.per_class.assign(l, kNaN);
  double sum = 0.0;
  int used = 0;
  for (int c = 0; c < l; ++c) {
    std::uint64_t row = 0, col = 0;
    for (int k = 0; k < l; ++k) row += m.at(c, k), col += m.at(k, c);
    const std::uint64_t uni = row + col - m.at(c, c);
    if (uni == 0) continue;
    r.per_class[c] = static_cast<double>(m.at(c, c)) / static_cast<double>(uni);
    if (c == 0 && !include_background) continue;
    sum += r.per_class[c];
    ++used;
  }
  r.mean = used ? sum / used : kNaN;
  return r;
}

BoundaryAccumulator::BoundaryAccumulator(int num_classes, int thickness)
    : num_classes_(num_classes),
      thickness_(thickness),
      pred_matched_(num_classes, 0),
      pred_total_(num_classes, 0),
      gt_matched_(num_classes, 0),
      gt_total_(num_classes, 0),
      present_(num_classes, false) {
  require(thickness >= 1, ErrorCode::invalid_argument, "f1_boundary: thickness must be >= 1");
  require(num_classes >= 1, ErrorCode::invalid_argument, "f1_boundary: need at least one class");
}

void BoundaryAccumulator::add(const LabelMap& pred_in, const LabelMap& gt) {
  check_same_size(pred_in, gt, "f1_boundary");
  LabelMap pred = pred_in;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt.labels[i] == kIgnore) pred.labels[i] = kIgnore;
  }
  const auto pc = contour_mask(pred);
  const auto gc = contour_mask(gt);
  const std::size_t n = gt.size();
  const std::int64_t limit = static_cast<std::int64_t>(thickness_) * thickness_;
  std::vector<std::uint8_t> ps(n), gs(n);
  for (int c = 0; c < num_classes_; ++c) {
    std::uint64_t np = 0, ng = 0;
    for (std::size_t i = 0; i < n; ++i) {
      ps[i] = pc[i] && pred.labels[i] == c;
      gs[i] = gc[i] && gt.labels[i] == c;
      np += ps[i];
      ng += gs[i];
      if (gt.labels[i] == c) present_[c] = true;
    }
    pred_total_[c] += np;
    gt_total_[c] += ng;
    if (np == 0 || ng == 0) continue;
    const auto dg = squared_distance_transform(gs, gt.height, gt.width);
    const auto dp = squared_distance_transform(ps, gt.height, gt.width);
    for (std::size_t i = 0; i < n; ++i) {
      if (ps[i] && dg[i] <= limit) ++pred_matched_[c];
      if (gs[i] && dp[i] <= limit) ++gt_matched_[c];
    }
  }
}

BoundaryScore BoundaryAccumulator::score() const {
  BoundaryScore s;
  s.thickness = thickness_;
  s.present = present_;
  double sp = 0, sr = 0, sf = 0;
  int used = 0;
  for (int c = 0; c < num_classes_; ++c) {
    const double p = pred_total_[c] ? static_cast<double>(pred_matched_[c]) / pred_total_[c] : 1.0;
    const double r = gt_total_[c] ? static_cast<double>(gt_matched_[c]) / gt_total_[c] : 1.0;
    const double f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
    s.precision.push_back(p);
    s.recall.push_back(r);
    s.f1.push_back(f);
    if (present_[c]) {
      sp += p, sr += r, sf += f;
      ++used;
    }
  }
  s.mean_precision = used ? sp / used : kNaN;
  s.mean_recall = used ? sr / used : kNaN;
  s.mean_f1 = used ? sf / used : kNaN;
  return s;
}

BoundaryScore f1_boundary(const LabelMap& pred, const LabelMap& gt, int num_classes,
                          int thickness) {
  BoundaryAccumulator acc(num_classes, thickness);
  acc.add(pred, gt);
  return acc.score();
}

void write_report(std::ostream& out, const IouResult& iou, const std::vector<BoundaryScore>& scores,
                  const std::vector<std::string>& names) {
  const int l = static_cast<int>(iou.per_class.size());
  out << "class\tiou";
  for (const auto& s : scores) {
    out << "\tboundary_p@" << s.thickness << "\tboundary_r@" << s.thickness << "\tboundary_f1@"
        << s.thickness;
  }
  out << '\n';
  auto num = [&](double v) {
    if (std::isnan(v)) {
      out << "\tnan";
    } else {
      out << '\t' << v;
    }
  };
  const auto old_prec = out.precision(6);
  for (int c = 0; c < l; ++c) {
    out << (c < static_cast<int>(names.size()) ? names[c] : "class" + std::to_string(c));
    num(iou.per_class[c]);
    for (const auto& s : scores) {
      num(s.precision[c]);
      num(s.recall[c]);
      num(s.f1[c]);
    }
    out << '\n';
  }
  out << "mean";
  num(iou.mean);
  for (const auto& s : scores) {
    num(s.mean_precision);
    num(s.mean_recall);
    num(s.mean_f1);
  }
  out << '\n';
  out.precision(old_prec);
}

}  // namespace yseg
