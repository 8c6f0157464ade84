#include "cnls/solver.hpp"

#include <cmath>
#include <sstream>

namespace cnls {

namespace {

double side_centre(const FieldVector& u, const std::vector<double>& c, const std::vector<int>& idx) {
  double m = 0.0, mx = 0.0;
  for (int j : idx) {
    const double w = l2_sq(u.grid, u[j]);
    m += w;
    mx += w * c[j];
  }
  return m > 0.0 ? mx / m : 0.0;
}

}  // namespace

AttainmentReport check_attainment(const SystemSpec& spec, const GroundStateResult& result,
                                  const std::vector<SeparationCurve>& sweeps, double tol_split) {
  check_compatible(spec, result.fields);
  AttainmentReport rep;
  rep.energy = result.energy;
  rep.tol_split = tol_split;
  const FieldVector& u = result.fields;
  const std::vector<double> c = centroids(u);

  int closest = -1, widest = -1;
  double closest_margin = 0.0, widest_sep = -1.0;
  for (const SeparationCurve& s : sweeps) {
    SplitCertificate cert;
    cert.left = s.left;
    cert.right = s.right;
    cert.limit = s.limit;
    cert.margin = s.limit - result.energy;
    cert.decoupled = true;
    for (int i : s.left)
      for (int j : s.right) {
        if (spec.beta(i, j) != 0.0) cert.decoupled = false;
        cert.cross_term += spec.beta(i, j) * product_l2_sq(u.grid, u[i], u[j]);
      }
    cert.separation = std::abs(side_centre(u, c, s.left) - side_centre(u, c, s.right));
    const int at = static_cast<int>(rep.splits.size());
    rep.splits.push_back(cert);
    if (cert.decoupled) continue;
    if (closest < 0 || cert.margin < closest_margin) {
      closest = at;
      closest_margin = cert.margin;
    }
    if (cert.separation > widest_sep) {
      widest = at;
      widest_sep = cert.separation;
    }
  }

  std::ostringstream note;
  if (result.diagnosis == Diagnosis::SplittingDetected) {
    rep.diagnosis = Diagnosis::SplittingDetected;
    rep.diverging_split = widest;
    note << "centroid separation diverged during minimization";
  } else if (closest >= 0 && closest_margin <= tol_split) {
    rep.diagnosis = Diagnosis::SplittingDetected;
    rep.diverging_split = closest;
    note << "energy within " << tol_split << " of the split limit " << rep.splits[closest].limit
         << " (margin " << closest_margin << ")";
  } else {
    rep.diagnosis = result.diagnosis;
    if (result.diagnosis == Diagnosis::Attained)
      note << "converged with nontrivial components below every split limit";
    else
      note << to_string(result.diagnosis) << ": " << result.note;
  }
  if (rep.diagnosis == Diagnosis::SplittingDetected)
    note << "; this is a numerical diagnosis, not a proof of nonexistence";
  rep.note = note.str();
  return rep;
}

}  // namespace cnls
