#include "cocyclab/surgery.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "cocyclab/error.hpp"
#include "cocyclab/parallel.hpp"
#include "json.hpp"

namespace cocyclab {

namespace {

void require_circle(const BaseSystem& sys) {
  if (sys.kind() != BaseKind::CircleRotation) {
    throw Error(ErrorCode::Unsupported, "the surgery is implemented over circle rotations only");
  }
}

std::vector<Mat2> grid_values(const Cocycle& co) {
  const BaseSystem& sys = co.base();
  std::vector<Mat2> out(sys.grid_size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = co.at(sys.grid_point(k));
  return out;
}

double neighbour_margin(const std::vector<Mat2>& v) {
  double worst = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) worst = std::max(worst, spectral_norm(v[(k + 1) % v.size()] - v[k]));
  return 4.0 * worst;
}

// max |A(g_k) - A(g_{k+s})| over grid pairs with s <= ceil(delta G), plus margin.
double modulus_at(const std::vector<Mat2>& v, double delta, double margin, unsigned threads) {
  const std::size_t g = v.size();
  const std::size_t reach = std::min(g / 2, static_cast<std::size_t>(std::ceil(delta * static_cast<double>(g))));
  std::vector<double> worst(g, 0.0);
  parallel_for(g, threads, [&](std::size_t k) {
    double w = 0.0;
    for (std::size_t s = 1; s <= reach; ++s) w = std::max(w, spectral_norm(v[(k + s) % g] - v[k]));
    worst[k] = w;
  });
  return *std::max_element(worst.begin(), worst.end()) + margin;
}

double continuity_modulus_impl(const Cocycle& co, double eps, unsigned threads) {
  require_circle(co.base());
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
  const std::vector<Mat2> v = grid_values(co);
  const double margin = neighbour_margin(v);
  const double spacing = co.base().grid_spacing();
  for (double delta = 0.5; delta >= 4.0 * spacing; delta /= 2.0) {
    if (modulus_at(v, delta, margin, threads) < eps) return delta;
  }
  throw Error(ErrorCode::ResolutionExceeded, "continuity modulus below 4 grid spacings");
}

// Merges sorted arcs that touch end to start.
std::vector<Arc> joined(std::vector<Arc> arcs) {
  std::sort(arcs.begin(), arcs.end(), [](const Arc& p, const Arc& q) { return p.lo < q.lo; });
  std::vector<Arc> out;
  for (const Arc& a : arcs) {
    if (!out.empty() && out.back().hi() == a.lo && out.back().lo < a.lo) {
      out.back().len += a.len;
    } else {
      out.push_back(a);
    }
  }
  return out;
}

std::size_t cell_index(const std::vector<Fixed>& cuts, Fixed x) {
  auto it = std::upper_bound(cuts.begin(), cuts.end(), x);
  return it == cuts.begin() ? cuts.size() - 1 : static_cast<std::size_t>(it - cuts.begin()) - 1;
}

Fixed cell_length(const std::vector<Fixed>& cuts, std::size_t i) {
  return cuts[(i + 1) % cuts.size()] - cuts[i];
}

// Point of the region nearest its length-weighted centroid.
BasePoint representative(const std::vector<Arc>& region, Fixed origin) {
  long double mass = 0.0L, moment = 0.0L;
  for (const Arc& a : region) {
    const long double mid = static_cast<long double>(a.lo - origin) + static_cast<long double>(a.len) / 2.0L;
    mass += static_cast<long double>(a.len);
    moment += mid * static_cast<long double>(a.len);
  }
  const Fixed centroid = origin + static_cast<Fixed>(moment / mass);
  const Arc* best = nullptr;
  double best_gap = 2.0;
  for (const Arc& a : region) {
    if (a.contains(centroid)) {
      BasePoint x;
      x.u[0] = centroid;
      return x;
    }
    const double gap = std::min(circle_distance(centroid, a.lo), circle_distance(centroid, a.hi()));
    if (gap < best_gap) {
      best_gap = gap;
      best = &a;
    }
  }
  BasePoint x;
  x.u[0] = best->lo + best->len / 2;
  return x;
}

std::string full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double continuity_modulus(const Cocycle& co, double eps, std::int64_t n) {
  if (n < 0) throw Error(ErrorCode::InvalidArgument, "N must be nonnegative");
  return continuity_modulus_impl(co, eps, 1);
}

SurgeryConfig build_config(const Cocycle& co, double eps, const SurgeryOptions& opt) {
  const BaseSystem& sys = co.base();
  require_circle(sys);
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
  UhOptions uh;
  uh.threads = opt.threads;
  if (uh_certify(co, uh).verdict == UhVerdict::Certificate) {
    throw Error(ErrorCode::NotApplicable, "the cocycle is uniformly hyperbolic");
  }
  SurgeryConfig cfg;
  cfg.eps = eps;
  cfg.exponent = lyapunov_estimate(co, BasePoint{}, opt.exponent_horizon);
  if (!(cfg.exponent > opt.min_exponent)) {
    throw Error(ErrorCode::NotApplicable, "exponent estimate " + full(cfg.exponent) + " is not positive");
  }
  cfg.c = std::log(co.sup_norm() + eps) + 1e-9;
  cfg.balance = eps + co.sup_norm() + 1e-9;

  cfg.window = choose_steering_window(co, eps, opt.threads);
  cfg.m1 = covering_time(sys, cfg.window.w);
  cfg.n = choose_n(co, eps, cfg.balance, static_cast<int>(cfg.m1));
  cfg.castle = build_castle(sys, cfg.n, opt.threads);
  cfg.delta = continuity_modulus_impl(co, eps, opt.threads);

  // Uniform cuts moved down to the start of any tower base they hit, so
  // every base lies inside one U_i.
  Fixed widest = 0;
  for (const Tower& t : cfg.castle.towers) widest = std::max(widest, t.base.len);
  const double room = cfg.delta - 2.0 * from_fixed(widest);
  if (!(room > 0.0)) throw Error(ErrorCode::ResolutionExceeded, "tower bases wider than delta / 2");
  const std::size_t k = static_cast<std::size_t>(std::floor(1.0 / room)) + 1;
  for (std::size_t i = 0; i < k; ++i) {
    Fixed cut = to_fixed(static_cast<double>(i) / static_cast<double>(k));
    const std::ptrdiff_t t = cfg.castle.tower_of(cut);
    if (t >= 0) cut = cfg.castle.towers[static_cast<std::size_t>(t)].base.lo;
    cfg.cuts.push_back(cut);
  }
  std::sort(cfg.cuts.begin(), cfg.cuts.end());
  cfg.cuts.erase(std::unique(cfg.cuts.begin(), cfg.cuts.end()), cfg.cuts.end());

  std::map<std::pair<std::int64_t, std::size_t>, std::size_t> index;
  cfg.tower_rep.resize(cfg.castle.towers.size());
  for (std::size_t t = 0; t < cfg.castle.towers.size(); ++t) {
    const Tower& tw = cfg.castle.towers[t];
    const auto key = std::make_pair(tw.height, cell_index(cfg.cuts, tw.base.lo));
    auto [it, fresh] = index.emplace(key, cfg.reps.size());
    if (fresh) {
      Representative r;
      r.height = key.first;
      r.cell = key.second;
      cfg.reps.push_back(r);
    }
    cfg.reps[it->second].region.push_back(tw.base);
    cfg.tower_rep[t] = it->second;
  }
  for (Representative& r : cfg.reps) {
    r.region = joined(r.region);
    for (const Arc& a : r.region) {
      cfg.l_points.push_back(a.lo);
      cfg.l_points.push_back(a.hi());
    }
    r.x = representative(r.region, cfg.cuts[r.cell]);
  }
  std::sort(cfg.l_points.begin(), cfg.l_points.end());
  cfg.l_points.erase(std::unique(cfg.l_points.begin(), cfg.l_points.end()), cfg.l_points.end());

  FreqOptions fo = opt.freq;
  fo.threads = opt.threads;
  cfg.freq = visit_freq_bound(sys, cfg.l_points, eps / static_cast<double>(cfg.n + 1), fo);
  return cfg;
}

std::vector<std::string> check_config(const Cocycle& co, const SurgeryConfig& cfg, unsigned threads) {
  const BaseSystem& sys = co.base();
  std::vector<std::string> bad;
  if (!(std::exp(cfg.c) > co.sup_norm() + cfg.eps)) bad.push_back("c");
  if (!(cfg.eps * static_cast<double>(cfg.n) > cfg.c)) bad.push_back("eps_n");
  {
    const std::vector<Mat2> v = grid_values(co);
    if (!(modulus_at(v, cfg.delta, neighbour_margin(v), threads) < cfg.eps)) bad.push_back("delta");
  }
  for (std::size_t i = 0; i < cfg.cuts.size(); ++i) {
    const Fixed len = cfg.cuts.size() == 1 ? 0 : cell_length(cfg.cuts, i);
    if (cfg.cuts.size() == 1 || !(from_fixed(len) < cfg.delta)) {
      bad.push_back("cover_diameter");
      break;
    }
  }
  for (const Fixed cut : cfg.cuts) {
    const std::ptrdiff_t t = cfg.castle.tower_of(cut);
    if (t >= 0 && cfg.castle.towers[static_cast<std::size_t>(t)].base.lo != cut) {
      bad.push_back("cuts_in_gaps");
      break;
    }
  }
  if (!check_castle(sys, cfg.castle, threads).ok()) bad.push_back("castle");
  bool freq_ok = cfg.freq.sup_frequency < cfg.eps / static_cast<double>(cfg.n + 1);
  const Fixed r = to_fixed(cfg.freq.rho);
  for (const Fixed p : cfg.l_points) {
    BasePoint lo, mid, hi;
    lo.u[0] = p - r;
    mid.u[0] = p;
    hi.u[0] = p + r - 1;
    const Cell& v = cfg.freq.v;
    if (!v.contains(lo) || !v.contains(mid) || !v.contains(hi)) freq_ok = false;
  }
  if (!freq_ok) bad.push_back("freq");
  for (const Representative& rep : cfg.reps) {
    bool inside = false;
    for (const Arc& a : rep.region) inside = inside || a.contains(rep.x.u[0]);
    if (!inside) {
      bad.push_back("reps");
      break;
    }
  }
  return bad;
}

PerturbedGenerator::PerturbedGenerator(GeneratorPtr original, const BaseSystem& sys,
                                       std::shared_ptr<const SurgeryConfig> cfg,
                                       std::vector<std::vector<Mat2>> tables)
    : original_(std::move(original)), sys_(sys), cfg_(std::move(cfg)), tables_(std::move(tables)),
      rho_(to_fixed(cfg_->freq.rho)) {}

PerturbedGenerator::Position PerturbedGenerator::locate(Fixed x) const {
  const Castle& c = cfg_->castle;
  Fixed z = x;
  for (std::int64_t k = 0; k <= c.n + 1; ++k, z -= sys_.shift()) {
    const std::ptrdiff_t t = c.tower_of(z);
    if (t < 0) continue;
    if (k >= c.towers[static_cast<std::size_t>(t)].height) break;
    return {static_cast<std::size_t>(t), k, z};
  }
  throw Error(ErrorCode::DecompositionFailed, "point not on a castle floor");
}

double PerturbedGenerator::bump(Fixed base) const {
  const std::vector<Fixed>& pts = cfg_->freq.points;
  if (pts.empty() || rho_ == 0) return 1.0;
  auto it = std::lower_bound(pts.begin(), pts.end(), base);
  const Fixed above = it == pts.end() ? pts.front() : *it;
  const Fixed below = it == pts.begin() ? pts.back() : *std::prev(it);
  const Fixed d = std::min<Fixed>(above - base, base - below);
  if (d >= rho_) return 1.0;
  const Fixed half = rho_ / 2;
  if (d <= half) return 0.0;
  const double t = static_cast<double>(d - half) / static_cast<double>(rho_ - half);
  return t * t * (3.0 - 2.0 * t);
}

Mat2 PerturbedGenerator::at(const Position& p) const {
  const Mat2& table = tables_[cfg_->tower_rep[p.tower]][static_cast<std::size_t>(p.floor)];
  const double b = bump(p.base);
  if (b == 1.0) return table;
  BasePoint y;
  y.u[0] = p.base + static_cast<Fixed>(p.floor) * sys_.shift();
  const Mat2 a = (*original_)(y);
  if (b == 0.0) return a;
  return a * exp_map(b * log_map(a.inverse_unimodular() * table));
}

Mat2 PerturbedGenerator::operator()(const BasePoint& x) const { return at(locate(x.u[0])); }

std::string PerturbedGenerator::describe() const {
  std::ostringstream os;
  os << "surgery(" << original_->describe() << ", eps=" << cfg_->eps << ", N=" << cfg_->n << ")";
  return os.str();
}

PerturbedCocycle assemble_perturbation(const Cocycle& co, const SurgeryConfig& cfg, unsigned threads) {
  const BaseSystem& sys = co.base();
  require_circle(sys);
  auto shared = std::make_shared<const SurgeryConfig>(cfg);
  std::vector<SegmentPlan> plans(cfg.reps.size());
  std::vector<std::vector<Mat2>> tables(cfg.reps.size());
  SegmentOptions so;
  so.c = cfg.balance;
  parallel_for(cfg.reps.size(), threads, [&](std::size_t r) {
    const Representative& rep = cfg.reps[r];
    plans[r] = plan_segment(co, rep.x, cfg.eps, static_cast<int>(cfg.n), cfg.window.w, static_cast<int>(cfg.m1),
                            cfg.window.m, so);
    tables[r] = plans[r].l;
    if (rep.height == cfg.n + 1) tables[r].push_back(co.at(sys.step(rep.x, cfg.n)));
  });
  auto gen = std::make_shared<const PerturbedGenerator>(co.generator_ptr(), sys, shared, std::move(tables));

  PerturbedCocycle pc{co, Cocycle(sys, gen), shared, gen, std::move(plans)};
  pc.distance_bound = std::exp(cfg.c) * (std::exp(cfg.c) + 1.0) * cfg.eps;

  const std::size_t g = sys.grid_size();
  std::vector<Mat2> values(g);
  std::vector<double> dist(g);
  parallel_for(g, threads, [&](std::size_t k) {
    const BasePoint x = sys.grid_point(k);
    values[k] = (*gen)(x);
    dist[k] = spectral_norm(values[k] - co.at(x));
  });
  double sup = *std::max_element(dist.begin(), dist.end());
  bool exact = true;
  for (std::size_t r = 0; r < cfg.reps.size(); ++r) {
    const Representative& rep = cfg.reps[r];
    const std::ptrdiff_t t = cfg.castle.tower_of(rep.x.u[0]);
    if (t < 0) throw Error(ErrorCode::DecompositionFailed, "representative outside B");
    for (std::int64_t j = 0; j < rep.height; ++j) {
      const PerturbedGenerator::Position p{static_cast<std::size_t>(t), j, rep.x.u[0]};
      const Mat2 m = gen->at(p);
      sup = std::max(sup, spectral_norm(m - co.at(sys.step(rep.x, j))));
      if (gen->bump(rep.x.u[0]) == 1.0 && !(m == gen->tables()[r][static_cast<std::size_t>(j)])) exact = false;
    }
  }
  pc.sup_distance = sup;
  pc.interior_exact = exact;

  double lip = 0.0, lip_a = 0.0;
  for (std::size_t k = 0; k < g; ++k) {
    lip = std::max(lip, spectral_norm(values[(k + 1) % g] - values[k]));
    lip_a = std::max(lip_a, spectral_norm(co.at(sys.grid_point((k + 1) % g)) - co.at(sys.grid_point(k))));
  }
  pc.lipschitz = lip / sys.grid_spacing();
  // Variation of A plus the bump slope 3 / rho times the largest correction.
  pc.lipschitz_bound = 2.0 * lip_a / sys.grid_spacing() + (cfg.freq.rho > 0.0 ? 3.0 / cfg.freq.rho : 0.0) * pc.distance_bound;

  if (!(pc.sup_distance < pc.distance_bound)) {
    throw Error(ErrorCode::BlendBoundViolated,
                "sup distance " + full(pc.sup_distance) + " >= bound " + full(pc.distance_bound));
  }
  return pc;
}

GrowthCertificate verify_growth(const PerturbedCocycle& pc, std::int64_t n, unsigned threads) {
  const SurgeryConfig& cfg = *pc.config;
  const PerturbedGenerator& gen = *pc.generator;
  const BaseSystem& sys = pc.original.base();
  const std::int64_t big = cfg.n;
  if (!(static_cast<double>(n) > std::max(static_cast<double>(cfg.freq.n0), static_cast<double>(big + 1) / cfg.eps))) {
    throw Error(ErrorCode::InvalidArgument, "horizon must exceed max(n0, (N + 1) / eps)");
  }
  // The proof bounds every factor of A~ by e^c; |A~| <= |A| + sup distance.
  const double c = std::max(cfg.c, std::log(pc.original.sup_norm() + pc.sup_distance));

  GrowthCertificate out;
  out.n = n;
  out.grid = sys.grid_size();
  out.bound = (3.0 * cfg.c + 2.0) * cfg.eps;
  out.direct.resize(out.grid);
  out.structural.resize(out.grid);
  struct Tally {
    std::int64_t r = 0, p = 0, q = 0, v = 0;
  };
  std::vector<Tally> tally(out.grid);
  parallel_for(out.grid, threads, [&](std::size_t k) {
    PerturbedGenerator::Position pos = gen.locate(sys.grid_point(k).u[0]);
    ScaledProduct prod;
    std::vector<std::pair<std::int64_t, PerturbedGenerator::Position>> visits;
    for (std::int64_t t = 0; t < n; ++t) {
      if (pos.floor == 0) visits.emplace_back(t, pos);
      prod.left_multiply(gen.at(pos));
      if (++pos.floor == cfg.castle.towers[pos.tower].height) {
        pos.base += static_cast<Fixed>(pos.floor) * sys.shift();
        const std::ptrdiff_t next = cfg.castle.tower_of(pos.base);
        if (next < 0) throw Error(ErrorCode::DecompositionFailed, "tower top does not return to B");
        pos.tower = static_cast<std::size_t>(next);
        pos.floor = 0;
      }
    }
    out.direct[k] = prod.log_norm() / static_cast<double>(n);

    Tally& tl = tally[k];
    tl.p = visits.empty() ? n : visits.front().first;
    std::int64_t end = tl.p;
    double log_bound = 0.0;
    for (std::size_t i = 0; i < visits.size(); ++i) {
      const std::int64_t h = cfg.castle.towers[visits[i].second.tower].height;
      if (h != big && h != big + 1) throw Error(ErrorCode::DecompositionFailed, "height outside {N, N + 1}");
      if (i + 1 < visits.size() && visits[i + 1].first - visits[i].first != h) {
        throw Error(ErrorCode::DecompositionFailed, "B-visits not spaced by the tower height");
      }
      if (visits[i].first + h > n) break;
      ++tl.r;
      end = visits[i].first + h;
      BasePoint b;
      b.u[0] = visits[i].second.base;
      if (cfg.freq.v.contains(b)) ++tl.v;
      log_bound += gen.bump(b.u[0]) == 1.0 ? 2.0 * cfg.eps * static_cast<double>(h) : c * static_cast<double>(h);
    }
    tl.q = n - end;
    if (tl.p > big + 1 || tl.q > big + 1) throw Error(ErrorCode::DecompositionFailed, "p or q exceeds N + 1");
    log_bound += c * static_cast<double>(tl.p + tl.q);
    out.structural[k] = log_bound / static_cast<double>(n);
  });

  out.margin = grid_margin(sys, out.direct);
  out.max_direct = *std::max_element(out.direct.begin(), out.direct.end());
  out.max_structural = *std::max_element(out.structural.begin(), out.structural.end());
  out.dominated = true;
  for (std::size_t k = 0; k < out.grid; ++k) {
    out.dominated = out.dominated && out.structural[k] >= out.direct[k];
    ++out.r_hist[tally[k].r];
    ++out.p_hist[tally[k].p];
    ++out.q_hist[tally[k].q];
    out.max_v_visits = std::max(out.max_v_visits, tally[k].v);
  }
  out.pass = out.max_direct + out.margin < out.bound && out.max_structural < out.bound && out.dominated;
  return out;
}

std::string certificate_to_json(const GrowthCertificate& g) {
  nlohmann::json j;
  j["horizon"] = g.n;
  j["grid"] = g.grid;
  j["max"] = g.max_direct;
  j["margin"] = g.margin;
  j["max_structural"] = g.max_structural;
  j["bound"] = g.bound;
  j["dominated"] = g.dominated;
  j["pass"] = g.pass;
  j["max_v_visits"] = g.max_v_visits;
  auto hist = [](const std::map<std::int64_t, std::int64_t>& h) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& [v, count] : h) a.push_back({v, count});
    return a;
  };
  j["decomposition"] = {{"r", hist(g.r_hist)}, {"p", hist(g.p_hist)}, {"q", hist(g.q_hist)}};
  return j.dump(2) + "\n";
}

std::string perturbation_to_csv(const PerturbedCocycle& pc) {
  const BaseSystem& sys = pc.original.base();
  std::ostringstream os;
  os << "x,a,b,c,d,bump\n";
  for (std::size_t k = 0; k < sys.grid_size(); ++k) {
    const BasePoint x = sys.grid_point(k);
    const auto pos = pc.generator->locate(x.u[0]);
    const Mat2 m = pc.generator->at(pos);
    os << full(x.coord()) << ',' << full(m.a) << ',' << full(m.b) << ',' << full(m.c) << ',' << full(m.d) << ','
       << full(pc.generator->bump(pos.base)) << '\n';
  }
  return os.str();
}

}  // namespace cocyclab
