#include "stimem/scenarios.hpp"

#include <fmt/format.h>
#include <fmt/os.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include "stimem/errors.hpp"
#include "stimem/nuclear_rates.hpp"
#include "stimem/observables.hpp"
#include "stimem/quantum_dynamics.hpp"
#include "stimem/semiclassical.hpp"

namespace stimem {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------- schema

const std::vector<ConfigEntry>& full_schema() {
  static const std::vector<ConfigEntry> schema = {
      {"cavity.length_over_pi", "80", "cavity length L in units of pi"},
      {"cavity.omega_atom", "1000", "atomic transition frequency omega_A"},
      {"cavity.gamma_atom", "0.05", "1D Wigner-Weisskopf rate Gamma_A"},
      {"cavity.modes", "200", "number of cavity modes N (even)"},
      {"cavity.atom_position", "", "atom position z_A; empty = L/2"},

      {"packet.carrier", "1000", "carrier frequency omega_0 = k_0"},
      {"packet.width", "0.25", "momentum width sigma"},
      {"packet.center", "117.7", "single-packet start position z_0"},
      {"packet.first", "95.7", "double pulse: first packet position z_1"},
      {"packet.second", "75.7", "double pulse: second packet position z_2"},
      {"packet.phase", "4.09", "relative phase Phi_S of the phase-coherent double pulse"},

      {"integrator.dt", "0.01", "RK4 time step"},
      {"integrator.stride", "10", "sample every stride steps"},
      {"integrator.t_end", "100", "end of the quantum trajectory"},
      {"integrator.norm_tolerance", "1e-6", "maximum allowed norm drift"},

      {"observables.grid_points", "4096", "spatial grid points on [0, L]"},
      {"observables.intensity_mode", "envelope", "envelope | raw"},
      {"observables.smoothing_window", "5", "boxcar width (samples) for decay rates"},
      {"observables.floor", "1e-10", "population floor below which decay rates are gaps"},
      {"observables.t_ref", "96", "reference time for intensity signatures"},
      {"observables.snapshots", "0,100", "times of intensity/spectrum snapshots"},
      {"observables.plateau_start", "20", "start of the decay-rate averaging window"},
      {"observables.plateau_end", "80", "end of the decay-rate averaging window"},

      {"scan.points", "64", "phase grid points on [0, 2 pi)"},
      {"scan.window_start", "50", "start of the max-P3 window"},
      {"scan.window_end", "66", "end of the max-P3 window"},

      {"semiclassical.n_res", "1", "resonant photons per pulse"},
      {"semiclassical.beam_area", "1", "beam area A_beam"},
      {"semiclassical.energy_factor", "1", "pulse energy n_res * factor * omega_0 (1 or 2)"},
      {"semiclassical.first_center", "30", "arrival time Lambda_1 of pulse 1"},
      {"semiclassical.second_center", "50", "arrival time Lambda_2 of pulse 2"},
      {"semiclassical.phase", "4.71", "relative phase Phi_M"},
      {"semiclassical.dt", "0.01", "OBE time step"},
      {"semiclassical.stride", "10", "OBE sample every stride steps"},
      {"semiclassical.t_end", "100", "end of the OBE trajectory"},
      {"semiclassical.scan_points", "64", "Phi_M grid points on [0, 2 pi)"},
      {"semiclassical.loss", "0.1", "fraction of excitation lost before t_int"},
      {"semiclassical.areas", "0.3,0.15,0.075", "pulse areas for the breakdown check"},
      {"semiclassical.breakdown_phases", "0,3.141592653589793", "Phi_M values for the breakdown"},
      {"semiclassical.nodes", "200", "Simpson intervals per pulse window"},

      {"nuclear.duration", "1e-13", "pulse FWHM T_P [s]"},
      {"nuclear.delay", "5e-12", "pulse separation tau_d [s]"},
      {"nuclear.n_res", "1", "resonant photons in pulse 1"},
      {"nuclear.second_fraction", "1", "resonant photons of pulse 2 relative to pulse 1"},
      {"nuclear.phases", "3.141592653589793,6.283185307179586", "Phi_M values"},
      {"nuclear.gamma_single", "7.1e6", "single-nucleus decay rate [1/s]"},
      {"nuclear.dipole", "1.3e-35", "transition dipole [C m]"},
      {"nuclear.energy_ev", "14400", "transition energy [eV]"},
      {"nuclear.grazing_angle", "2.5e-3", "grazing angle [rad]"},
      {"nuclear.beam_width", "10e-6", "beam width d_beam [m]"},
      {"nuclear.layer_thickness", "1.2e-9", "57Fe layer thickness [m]"},
      {"nuclear.quality_factor", "50", "cavity enhancement Q, < 100"},
      {"nuclear.iron_density", "7874", "mass density [kg/m^3]"},
      {"nuclear.coherent_nuclei", "25", "N_coh"},
      {"nuclear.steps_per_sigma", "40", "OBE steps per sigma_t"},
      {"nuclear.curve_points", "200", "points of the delayed decay curve"},
  };
  return schema;
}

struct ScenarioSpec {
  ScenarioInfo info;
  std::vector<std::string> sections;
  std::vector<std::pair<std::string, std::string>> overrides;
};

const std::vector<ScenarioSpec>& specs() {
  static const std::vector<ScenarioSpec> table = {
      {{"free-wp", "Fig. 2", "free single-photon packet: intensity and mode occupation", ""},
       {"cavity", "packet", "observables"},
       {{"cavity.modes", "1000"}, {"packet.center", "10"}, {"observables.snapshots", "0,70,160"}}},
      {{"spon-decay", "Fig. 3", "spontaneous decay of an excited atom", ""},
       {"cavity", "integrator", "observables"},
       {{"cavity.modes", "1000"}, {"integrator.t_end", "160"}, {"observables.snapshots", "40,100,160"}}},
      {{"stim-early", "Figs. 4, 5", "excited atom hit by a photon right in front of it", ""},
       {"cavity", "packet", "integrator", "observables"},
       {{"packet.center", "117.7"}}},
      {{"stim-late", "Fig. 4", "excited atom hit by a late photon (re-absorption)", ""},
       {"cavity", "packet", "integrator", "observables"},
       {{"packet.center", "87.7"}}},
      {{"double-pulse", "Fig. 6", "ground-state atom driven by two single-photon packets", ""},
       {"cavity", "packet", "integrator", "observables"},
       {{"observables.snapshots", "0,50,90,100"}}},
      {{"phase-scan", "Figs. 7, 8", "phase-coherent double pulse: max excitation vs Phi_S", ""},
       {"cavity", "packet", "integrator", "observables", "scan"},
       {}},
      {{"semiclassical-compare", "Fig. 9", "OBE rho22 vs quantum P3 for the double pulse",
        "semiclassical.phase"},
       {"cavity", "packet", "integrator", "observables", "semiclassical"},
       {}},
      {{"perturbative-breakdown", "perturbative expansion",
        "second-order R terms vs full OBE over shrinking pulse areas", "semiclassical.breakdown_phases"},
       {"cavity", "packet", "semiclassical"},
       {}},
      {{"fel-rates", "Fig. 10", "57Fe delayed signal, FEL double pulse (100 fs, 5 ps)", "nuclear.phases"},
       {"nuclear"},
       {}},
      {{"synchrotron-rates", "Fig. 11", "57Fe delayed signal, synchrotron-like pulses (100 ps, 8 ns)",
        "nuclear.phases"},
       {"nuclear"},
       {{"nuclear.duration", "1e-10"}, {"nuclear.delay", "8e-9"}, {"nuclear.second_fraction", "0.25"}}},
  };
  return table;
}

const ScenarioSpec& find_spec(const std::string& name) {
  for (const auto& s : specs())
    if (s.info.name == name) return s;
  throw ConfigError("scenario", "unknown scenario '" + name + "'");
}

// ---------------------------------------------------------------- output

std::string num(double v) { return fmt::format("{:.17g}", v); }

class Csv {
public:
  Csv(const std::filesystem::path& path, const std::vector<std::string>& header)
      : out_(path, std::ios::binary) {
    if (!out_) throw ConfigError("output", "cannot write " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
  }
  void row(std::initializer_list<double> values) {
    bool first = true;
    for (double v : values) {
      out_ << (first ? "" : ",") << num(v);
      first = false;
    }
    out_ << '\n';
  }

private:
  std::ofstream out_;
};

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("output", "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------- helpers

CavityModel make_model(const Config& c) {
  CavityParams p;
  p.length = c.get_double("cavity.length_over_pi") * kPi;
  p.omega_atom = c.get_double("cavity.omega_atom");
  p.gamma_atom = c.get_double("cavity.gamma_atom");
  p.omega_carrier = c.contains("packet.carrier") ? c.get_double("packet.carrier") : p.omega_atom;
  p.num_modes = c.get_int("cavity.modes");
  p.atom_position = c.get_optional_double("cavity.atom_position");
  return CavityModel::build(p);
}

IntegrationOptions integration(const Config& c) {
  IntegrationOptions o;
  o.dt = c.get_double("integrator.dt");
  o.stride = c.get_int("integrator.stride");
  o.norm_tolerance = c.get_double("integrator.norm_tolerance");
  if (!(o.dt > 0.0)) throw ConfigError("integrator.dt", "must be positive");
  if (o.stride < 1) throw ConfigError("integrator.stride", "must be >= 1");
  return o;
}

DecayRateOptions decay_options(const Config& c) {
  DecayRateOptions o;
  o.smoothing_window = c.get_int("observables.smoothing_window");
  o.floor = c.get_double("observables.floor");
  return o;
}

IntensityMode intensity_mode(const Config& c) {
  const auto& m = c.raw("observables.intensity_mode");
  if (m == "envelope") return IntensityMode::envelope;
  if (m == "raw") return IntensityMode::raw;
  throw ConfigError("observables.intensity_mode", "expected 'envelope' or 'raw'");
}

std::vector<double> spatial_grid(const Config& c, const CavityModel& model) {
  const std::size_t points = c.get_size("observables.grid_points");
  if (points < 3) throw ConfigError("observables.grid_points", "need at least 3 points");
  if (intensity_mode(c) == IntensityMode::raw && points < raw_grid_points(model))
    throw ConfigError("observables.grid_points",
                      fmt::format("raw intensity needs >= {} points", raw_grid_points(model)));
  return uniform_grid(model.length(), points);
}

WavePacketSpec packet(const Config& c, double center) {
  return {center, c.get_double("packet.carrier"), c.get_double("packet.width")};
}

std::vector<double> sorted_times(const Config& c, const std::string& key) {
  auto t = c.get_list(key);
  for (double v : t)
    if (v < 0.0) throw ConfigError(key, "times must be non-negative");
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  return t;
}

template <class State>
struct Trajectory {
  TimeSeries population;
  std::map<double, State> snapshots;
  State final_state;
  double max_norm_drift = 0.0;
};

// Integrates piecewise so the exact states at `checkpoints` are kept.
template <class State, class Evolve>
Trajectory<State> run_trajectory(const State& initial, double t_end, std::vector<double> checkpoints,
                                 const IntegrationOptions& options, Evolve&& evolve) {
  Trajectory<State> out;
  State state = initial;
  checkpoints.push_back(t_end);
  std::sort(checkpoints.begin(), checkpoints.end());
  auto observer = [&](const State& s) {
    if (!out.population.times.empty() && s.time <= out.population.times.back()) return;
    out.population.push(s.time, population(s));
  };
  for (double t : checkpoints) {
    if (t > t_end) break;
    if (t > state.time) {
      auto r = evolve(state, t, options, observer);
      out.max_norm_drift = std::max(out.max_norm_drift, r.max_norm_drift);
      state = std::move(r.final_state);
    } else if (out.population.times.empty()) {
      observer(state);
    }
    out.snapshots.emplace(t, state);
  }
  out.final_state = state;
  return out;
}

auto evolve1 = [](const CavityModel& model) {
  return [&model](const OneExcitationState& s, double t, const IntegrationOptions& o,
                  const SampleObserver<OneExcitationState>& obs) {
    return evolve_one_excitation(s, model, t, o, obs);
  };
};

auto evolve2 = [](const CavityModel& model) {
  return [&model](const TwoExcitationState& s, double t, const IntegrationOptions& o,
                  const SampleObserver<TwoExcitationState>& obs) {
    return evolve_two_excitation(s, model, t, o, obs);
  };
};

double window_extreme(const TimeSeries& s, double a, double b, bool maximum) {
  double best = maximum ? -INFINITY : INFINITY;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.times[i] < a || s.times[i] > b || !std::isfinite(s.values[i])) continue;
    best = maximum ? std::max(best, s.values[i]) : std::min(best, s.values[i]);
  }
  if (!std::isfinite(best)) throw NumericalError(fmt::format("no samples in [{}, {}]", a, b));
  return best;
}

double window_mean(const TimeSeries& s, double a, double b) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.times[i] < a || s.times[i] > b || !std::isfinite(s.values[i])) continue;
    sum += s.values[i];
    ++n;
  }
  if (n == 0) throw NumericalError(fmt::format("no samples in [{}, {}]", a, b));
  return sum / static_cast<double>(n);
}

void write_population(const std::filesystem::path& path, const TimeSeries& p, const TimeSeries& rate,
                      double gamma) {
  Csv csv(path, {"t", "population", "decay_rate", "rate_over_gamma"});
  for (std::size_t i = 0; i < p.size(); ++i)
    csv.row({p.times[i], p.values[i], rate.values[i], rate.values[i] / gamma});
}

void append_profile(Csv& csv, const SpatialProfile& p, double tag) {
  for (std::size_t i = 0; i < p.z.size(); ++i) csv.row({tag, p.time, p.z[i], p.values[i]});
}

void append_spectrum(Csv& csv, const CavityModel& model, const std::vector<double>& s, double t,
                     double tag) {
  for (int i = 0; i < model.num_modes(); ++i)
    csv.row({tag, t, static_cast<double>(model.shifted_index(i)), model.detunings()[i],
             s[static_cast<std::size_t>(i)]});
}

const std::vector<std::string> kProfileHeader = {"tag", "t", "z", "intensity"};
const std::vector<std::string> kSpectrumHeader = {"tag", "t", "n_s", "detuning", "occupation"};

json model_summary(const CavityModel& model) {
  return {{"modes", model.num_modes()},
          {"resonant_index", model.resonant_index()},
          {"dipole", model.dipole()},
          {"golden_rule_rate", model.golden_rule_rate()}};
}

// ---------------------------------------------------------------- scenarios

json run_free_wp(const Config& c, const std::filesystem::path& dir) {
  const CavityModel model = make_model(c);
  const WavePacketSpec spec = packet(c, c.get_double("packet.center"));
  const FieldOnlyState initial = init_free_packet(model, spec);
  const auto grid = spatial_grid(c, model);
  const auto mode = intensity_mode(c);
  const auto times = sorted_times(c, "observables.snapshots");

  Csv profiles(dir / "intensity.csv", kProfileHeader);
  Csv spectra(dir / "spectrum.csv", kSpectrumHeader);
  const SpatialProfile start = intensity(initial, model, grid, mode);
  const double dz = grid[1] - grid[0];
  // Four intensity standard deviations; beyond this the mirrors start to matter.
  const double reach = 4.0 / (2.0 * spec.width);

  double rigidity = 0.0;
  json peaks = json::array();
  for (double t : times) {
    const FieldOnlyState s = evolve_free(initial, model, t);
    const SpatialProfile prof = intensity(s, model, grid, mode);
    append_profile(profiles, prof, 1.0);
    append_spectrum(spectra, model, spectrum(s), t, 1.0);
    const auto peak = std::max_element(prof.values.begin(), prof.values.end()) - prof.values.begin();
    peaks.push_back(prof.z[static_cast<std::size_t>(peak)]);

    if (t > 0.0 && spec.center + t + reach < model.length() && spec.center - reach > 0.0) {
      // I(z, t) against I(z - t, 0), linear interpolation of the start profile
      double num2 = 0.0, den2 = 0.0;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = (grid[i] - t) / dz;
        double ref = 0.0;
        if (x >= 0.0 && x <= static_cast<double>(grid.size() - 1)) {
          const auto j = std::min(static_cast<std::size_t>(x), grid.size() - 2);
          const double f = x - static_cast<double>(j);
          ref = (1.0 - f) * start.values[j] + f * start.values[j + 1];
        }
        num2 += (prof.values[i] - ref) * (prof.values[i] - ref);
        den2 += ref * ref;
      }
      rigidity = std::max(rigidity, std::sqrt(num2 / den2));
    }
  }
  return {{"model", model_summary(model)},
          {"captured_mass", captured_mass(spec, model)},
          {"norm", initial.norm()},
          {"snapshot_times", times},
          {"peak_positions", peaks},
          {"rigidity_rms", rigidity}};
}

json run_spon_decay(const Config& c, const std::filesystem::path& dir) {
  const CavityModel model = make_model(c);
  const auto opts = integration(c);
  const double t_end = c.get_double("integrator.t_end");
  const auto times = sorted_times(c, "observables.snapshots");
  const auto traj = run_trajectory(init_excited_atom(model), t_end, times, opts, evolve1(model));
  const auto rate = decay_rate(traj.population, decay_options(c));
  write_population(dir / "population.csv", traj.population, rate.rate, model.gamma_atom());

  const auto grid = spatial_grid(c, model);
  const auto mode = intensity_mode(c);
  Csv profiles(dir / "intensity.csv", kProfileHeader);
  Csv spectra(dir / "spectrum.csv", kSpectrumHeader);
  double mirror = 0.0;
  for (const auto& [t, s] : traj.snapshots) {
    const auto prof = intensity(s, model, grid, mode);
    append_profile(profiles, prof, 2.0);
    append_spectrum(spectra, model, spectrum(s), t, 2.0);
    const std::size_t n = prof.values.size();
    double peak = *std::max_element(prof.values.begin(), prof.values.end());
    for (std::size_t i = 0; i < n && peak > 0.0; ++i)
      mirror = std::max(mirror, std::abs(prof.values[i] - prof.values[n - 1 - i]) / peak);
  }
  const double a = c.get_double("observables.plateau_start");
  const double b = c.get_double("observables.plateau_end");
  const double mean = window_mean(rate.rate, a, b);
  return {{"model", model_summary(model)},
          {"mean_decay_rate", mean},
          {"mean_decay_rate_over_gamma", mean / model.gamma_atom()},
          {"plateau", {a, b}},
          {"final_population", population(traj.final_state)},
          {"mirror_asymmetry", mirror},
          {"gap_count", rate.gap_count},
          {"max_norm_drift", traj.max_norm_drift}};
}

json run_stimulated(const Config& c, const std::filesystem::path& dir) {
  const CavityModel model = make_model(c);
  const auto opts = integration(c);
  const double t_end = c.get_double("integrator.t_end");
  const double t_ref = c.get_double("observables.t_ref");
  const WavePacketSpec spec = packet(c, c.get_double("packet.center"));
  std::vector<std::string> warnings;
  const auto psi3 = init_photon_plus_excited_atom(model, spec, &warnings);

  std::vector<double> checkpoints = {0.0};
  if (t_ref <= t_end) checkpoints.push_back(t_ref);
  const auto stim = run_trajectory(psi3, t_end, checkpoints, opts, evolve2(model));
  const auto spon = run_trajectory(init_excited_atom(model), t_end, checkpoints, opts, evolve1(model));
  const auto dopts = decay_options(c);
  const auto rate3 = decay_rate(stim.population, dopts);
  const auto rate2 = decay_rate(spon.population, dopts);
  write_population(dir / "population.csv", stim.population, rate3.rate, model.gamma_atom());
  write_population(dir / "population_spontaneous.csv", spon.population, rate2.rate, model.gamma_atom());

  // Pulse centre reaches the atom after (z_A - z0) / c.
  const double arrival = model.atom_position() - spec.center;
  const double tp = spec.duration();
  const double lo = std::max(0.0, arrival - 0.5 * tp);
  const double hi = arrival + 0.5 * tp;
  const double g = model.gamma_atom();

  json summary = {{"model", model_summary(model)},
                  {"arrival_time", arrival},
                  {"pulse_window", {lo, hi}},
                  {"peak_rate_over_gamma", window_extreme(rate3.rate, 0.0, t_end, true) / g},
                  {"window_max_rate_over_gamma", window_extreme(rate3.rate, lo, hi, true) / g},
                  {"window_min_rate_over_gamma", window_extreme(rate3.rate, lo, hi, false) / g},
                  {"final_population", population(stim.final_state)},
                  {"final_population_spontaneous", population(spon.final_state)},
                  {"max_norm_drift", std::max(stim.max_norm_drift, spon.max_norm_drift)},
                  {"warnings", warnings}};

  if (t_ref > t_end) return summary;

  const auto grid = spatial_grid(c, model);
  const auto mode = intensity_mode(c);
  const FieldOnlyState free0 = init_free_packet(model, spec);
  const auto i1 = intensity(evolve_free(free0, model, t_ref), model, grid, mode);
  const auto i2 = intensity(spon.snapshots.at(t_ref), model, grid, mode);
  const auto i3 = intensity(stim.snapshots.at(t_ref), model, grid, mode);
  Csv profiles(dir / "intensity.csv", kProfileHeader);
  append_profile(profiles, intensity(free0, model, grid, mode), 1.0);
  append_profile(profiles, i1, 1.0);
  append_profile(profiles, i2, 2.0);
  append_profile(profiles, intensity(stim.snapshots.at(0.0), model, grid, mode), 3.0);
  append_profile(profiles, i3, 3.0);

  const auto diff = intensity_differences(i1, i2, i3, model.length());
  summary["t_ref"] = t_ref;
  summary["delta_i_left"] = diff.left;
  summary["delta_i_right"] = diff.right;
  summary["delta_i_total"] = diff.total;
  if (model.atom_centered()) {
    const auto induced = induced_packet(i3, i1, model);
    Csv out(dir / "induced_packet.csv", {"z", "induced", "stimulating"});
    SpatialProfile stimulating;
    stimulating.time = t_ref;
    for (std::size_t i = 0, k = 0; i < grid.size(); ++i) {
      if (k < induced.z.size() && grid[i] == induced.z[k]) {
        stimulating.z.push_back(grid[i]);
        stimulating.values.push_back(i1.values[i]);
        out.row({grid[i], induced.values[k], i1.values[i]});
        ++k;
      }
    }
    const double induced_c = profile_centroid(induced);
    const double stim_c = profile_centroid(stimulating);
    summary["induced_integral"] = integrate_profile(induced, 0.5 * model.length(), model.length());
    summary["induced_centroid"] = induced_c;
    summary["stimulating_centroid"] = stim_c;
    summary["centroid_offset"] = induced_c - stim_c;
    summary["pulse_duration"] = tp;
  }
  return summary;
}

json run_double_pulse(const Config& c, const std::filesystem::path& dir) {
  const CavityModel model = make_model(c);
  const auto opts = integration(c);
  const double t_end = c.get_double("integrator.t_end");
  const double z1 = c.get_double("packet.first");
  const double z2 = c.get_double("packet.second");
  const double width = c.get_double("packet.width");
  const auto prepared = init_two_photons(model, z1, z2, width);
  const auto times = sorted_times(c, "observables.snapshots");
  const auto traj = run_trajectory(prepared.state, t_end, times, opts, evolve2(model));
  const auto rate = decay_rate(traj.population, decay_options(c));
  write_population(dir / "population.csv", traj.population, rate.rate, model.gamma_atom());

  const auto grid = spatial_grid(c, model);
  const auto mode = intensity_mode(c);
  Csv profiles(dir / "intensity.csv", kProfileHeader);
  Csv spectra(dir / "spectrum.csv", kSpectrumHeader);
  for (const auto& [t, s] : traj.snapshots) {
    append_profile(profiles, intensity(s, model, grid, mode), 3.0);
    append_spectrum(spectra, model, spectrum(s), t, 3.0);
  }
  const double t1 = model.atom_position() - z1;
  const double t2 = model.atom_position() - z2;
  const double tp = 4.0 / width;
  return {{"model", model_summary(model)},
          {"raw_norm", prepared.raw_norm},
          {"arrival_times", {t1, t2}},
          {"p3_after_first_pulse", window_extreme(traj.population, t1, t2 - 0.5 * tp, true)},
          {"p3_after_second_pulse", window_extreme(traj.population, t2, t2 + 0.5 * tp, true)},
          {"final_population", population(traj.final_state)},
          {"max_norm_drift", traj.max_norm_drift}};
}

json run_phase_scan(const Config& c, const std::filesystem::path& dir) {
  const CavityModel model = make_model(c);
  PhaseScanOptions po;
  po.width = c.get_double("packet.width");
  po.window_start = c.get_double("scan.window_start");
  po.window_end = c.get_double("scan.window_end");
  po.integration = integration(c);
  const double z1 = c.get_double("packet.first");
  const double z2 = c.get_double("packet.second");
  const std::size_t points = c.get_size("scan.points");
  if (points < 3) throw ConfigError("scan.points", "need at least 3 points");
  const auto scan = phase_scan(model, z1, z2, points, po);
  {
    Csv csv(dir / "scan.csv", {"phi", "max_p3"});
    for (std::size_t i = 0; i < scan.phases.size(); ++i) csv.row({scan.phases[i], scan.values[i]});
  }

  // Trajectories, spectra and profiles at the two extremal phases.
  const double t_end = c.get_double("integrator.t_end");
  const auto grid = spatial_grid(c, model);
  const auto mode = intensity_mode(c);
  Csv pop(dir / "population.csv", {"phi", "t", "population", "decay_rate", "rate_over_gamma"});
  Csv profiles(dir / "intensity.csv", kProfileHeader);
  Csv spectra(dir / "spectrum.csv", kSpectrumHeader);
  json at = json::object();
  double drift = 0.0;
  // Interaction window of the second packet.
  const double t2 = model.atom_position() - z2;
  const double tp = 4.0 / po.width;
  for (const auto& [label, ext] : {std::pair{"minimum", scan.minimum}, std::pair{"maximum", scan.maximum}}) {
    const double phi = ext.position;
    const auto prepared = init_phase_coherent_double(model, z1, z2, phi, po.width);
    const auto traj =
        run_trajectory(prepared.state, t_end, {0.0}, po.integration, evolve2(model));
    drift = std::max(drift, traj.max_norm_drift);
    const auto rate = decay_rate(traj.population, decay_options(c));
    for (std::size_t i = 0; i < traj.population.size(); ++i)
      pop.row({phi, traj.population.times[i], traj.population.values[i], rate.rate.values[i],
               rate.rate.values[i] / model.gamma_atom()});
    append_profile(profiles, intensity(traj.snapshots.at(0.0), model, grid, mode), phi);
    append_profile(profiles, intensity(traj.final_state, model, grid, mode), phi);
    append_spectrum(spectra, model, spectrum(traj.snapshots.at(0.0)), 0.0, phi);
    at[label] = {{"phi", phi},
                 {"max_p3", ext.value},
                 {"raw_norm", prepared.raw_norm},
                 {"peak_rate_over_gamma", window_extreme(rate.rate, t2 - 0.5 * tp, t2 + 0.5 * tp, true) /
                                              model.gamma_atom()}};
  }
  return {{"model", model_summary(model)},
          {"points", points},
          {"phi_min", scan.minimum.position},
          {"phi_max", scan.maximum.position},
          {"min_value", scan.minimum.value},
          {"max_value", scan.maximum.value},
          {"extrema", at},
          {"max_norm_drift", drift}};
}

struct ObeSetup {
  PulsePair pulses;
  ObeParams params;
  ObeOptions options;
};

ObeSetup obe_setup(const Config& c, const CavityModel& model) {
  ObeSetup s;
  const double width = c.get_double("packet.width");
  const double factor = c.get_double("semiclassical.energy_factor");
  if (factor != 1.0 && factor != 2.0) throw ConfigError("semiclassical.energy_factor", "must be 1 or 2");
  s.pulses.amplitude = normalize_amplitude_1d(
      c.get_double("semiclassical.n_res"), c.get_double("semiclassical.beam_area"), width,
      c.get_double("packet.carrier"),
      factor == 1.0 ? EnergyConvention::per_pulse : EnergyConvention::single_pulse_doubled);
  s.pulses.rate = width;
  s.pulses.first_center = c.get_double("semiclassical.first_center");
  s.pulses.second_center = c.get_double("semiclassical.second_center");
  s.pulses.relative_phase = c.get_double("semiclassical.phase");
  s.params = {model.gamma_atom(), model.omega_atom() - c.get_double("packet.carrier"), model.dipole()};
  s.options.dt = c.get_double("semiclassical.dt");
  s.options.stride = c.get_int("semiclassical.stride");
  return s;
}

json run_semiclassical_compare(const Config& c, const std::filesystem::path& dir) {
  const CavityModel model = make_model(c);
  ObeSetup setup = obe_setup(c, model);
  setup.pulses.validate();
  const double t_end = c.get_double("semiclassical.t_end");
  const auto obe = evolve_obe(setup.pulses, setup.params, DensityState{}, t_end, setup.options);
  {
    Csv csv(dir / "obe.csv", {"t", "rho22", "re_rho12", "im_rho12"});
    for (const auto& s : obe.samples) csv.row({s.time, s.rho22, s.rho12.real(), s.rho12.imag()});
  }

  // OBE scan of the post-pulse maximum of rho22.
  const std::size_t points = c.get_size("semiclassical.scan_points");
  if (points < 3) throw ConfigError("semiclassical.scan_points", "need at least 3 points");
  const double w0 = setup.pulses.second_center;
  const double w1 = w0 + 4.0 / setup.pulses.rate;
  double drift = obe.max_trace_drift;
  std::vector<double> drifts(points, 0.0);
  const auto scan = scan_phases(points, [&](double phi) {
    PulsePair p = setup.pulses;
    p.relative_phase = phi;
    ObeOptions o = setup.options;
    o.stride = 1;
    const auto tr = evolve_obe(p, setup.params, DensityState{}, w1, o);
    double best = 0.0;
    for (const auto& s : tr.samples)
      if (s.time >= w0) best = std::max(best, s.rho22);
    drifts[static_cast<std::size_t>(std::lround(phi / kTwoPi * static_cast<double>(points))) % points] =
        tr.max_trace_drift;
    return best;
  });
  drift = std::max(drift, *std::max_element(drifts.begin(), drifts.end()));
  {
    Csv csv(dir / "obe_scan.csv", {"phi", "max_rho22"});
    for (std::size_t i = 0; i < scan.phases.size(); ++i) csv.row({scan.phases[i], scan.values[i]});
  }

  // Quantum counterpart.
  const auto opts = integration(c);
  const auto prepared = init_phase_coherent_double(model, c.get_double("packet.first"),
                                                   c.get_double("packet.second"),
                                                   c.get_double("packet.phase"), c.get_double("packet.width"));
  const auto traj = run_trajectory(prepared.state, c.get_double("integrator.t_end"), {}, opts, evolve2(model));
  {
    Csv csv(dir / "quantum.csv", {"t", "p3"});
    for (std::size_t i = 0; i < traj.population.size(); ++i)
      csv.row({traj.population.times[i], traj.population.values[i]});
  }

  // Largest |rho22 - P3| at common sample times.
  double mismatch = 0.0;
  for (const auto& s : obe.samples) {
    const auto& ts = traj.population.times;
    const auto it = std::lower_bound(ts.begin(), ts.end(), s.time - 1e-9);
    if (it != ts.end() && std::abs(*it - s.time) < 1e-9)
      mismatch = std::max(mismatch, std::abs(s.rho22 - traj.population.values[static_cast<std::size_t>(it - ts.begin())]));
  }

  const double predicted =
      std::fmod(setup.pulses.delay() * c.get_double("packet.carrier"), kTwoPi);
  const double rabi = setup.params.dipole * setup.pulses.amplitude;
  return {{"amplitude", setup.pulses.amplitude},
          {"peak_rabi", rabi},
          {"pulse_area", rabi * std::sqrt(kPi) / setup.pulses.rate},
          {"obe_phi_min", scan.minimum.position},
          {"obe_phi_max", scan.maximum.position},
          {"obe_min_value", scan.minimum.value},
          {"obe_max_value", scan.maximum.value},
          {"predicted_phase_offset", predicted},
          {"quantum_phase", c.get_double("packet.phase")},
          {"max_abs_difference", mismatch},
          {"max_trace_drift", drift},
          {"max_norm_drift", traj.max_norm_drift}};
}

// Least-squares slope of log(err) against log(area).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double d = static_cast<double>(n) * sxx - sx * sx;
  return d == 0.0 ? NAN : (static_cast<double>(n) * sxy - sx * sy) / d;
}

json run_perturbative_breakdown(const Config& c, const std::filesystem::path& dir) {
  const CavityModel model = make_model(c);
  ObeSetup setup = obe_setup(c, model);
  const double gamma = setup.params.gamma;
  const double rabi = setup.params.dipole * setup.pulses.amplitude;

  // Pulse 1 alone, then free decay until the atom has lost `loss` of its excitation.
  PulsePair first = setup.pulses;
  first.second_scale = 0.0;
  first.second_center = first.first_center + 1.0;
  const double pulse_end = first.first_center + 2.0 / first.rate;
  const double t_int = pulse_end + t_int_from_loss(c.get_double("semiclassical.loss"), gamma);
  const DensityState start = evolve_obe(first, setup.params, DensityState{}, t_int, setup.options).final_state;

  const auto areas = c.get_list("semiclassical.areas");
  const auto phases = c.get_list("semiclassical.breakdown_phases");
  BreakdownOptions bo;
  bo.nodes = c.get_int("semiclassical.nodes");
  Csv csv(dir / "breakdown.csv", {"phi", "area", "duration", "r_sd", "r_se", "r_ab", "r_phi1", "r_phi2",
                                  "n_se", "predicted", "full", "error"});
  json per_phase = json::array();
  double trace = 0.0;
  for (double phi : phases) {
    std::vector<double> errs;
    for (double area : areas) {
      if (!(area > 0.0)) throw ConfigError("semiclassical.areas", "areas must be positive");
      // Fixed peak Rabi frequency; a shorter pulse carries a smaller area.
      const double rate = rabi * std::sqrt(kPi) / area;
      const double duration = 4.0 / rate;
      const double center = t_int + 0.5 * duration;
      PulsePair second;
      second.amplitude = setup.pulses.amplitude;
      second.rate = rate;
      second.first_center = center - 1.0;
      second.second_center = center;
      second.relative_phase = phi;
      second.first_scale = 0.0;
      ObeOptions o = setup.options;
      o.dt = std::min(o.dt, 1.0 / (40.0 * rate));
      const auto full = evolve_obe(second, setup.params, start, t_int + duration, o);
      trace = std::max(trace, full.max_trace_drift);
      const auto b = perturbative_terms(
          start, [=](double t) { return rabi * std::exp(-(t - center) * (t - center) * rate * rate); }, phi,
          duration, gamma, bo);
      const double predicted = b.predicted_excited(start.rho22);
      const double err = std::abs(predicted - full.final_state.rho22);
      errs.push_back(err);
      csv.row({phi, area, duration, b.spontaneous_decay, b.stimulated, b.absorption, b.phase_first,
               b.phase_second, stimulated_count(b), predicted, full.final_state.rho22, err});
    }
    per_phase.push_back({{"phi", phi}, {"errors", errs}, {"slope", loglog_slope(areas, errs)}});
  }
  return {{"t_int", t_int},
          {"rho22_at_t_int", start.rho22},
          {"im_rho12_at_t_int", start.rho12.imag()},
          {"peak_rabi", rabi},
          {"areas", areas},
          {"phases", per_phase},
          {"max_trace_drift", trace}};
}

json run_nuclear(const Config& c, const std::filesystem::path& dir) {
  nuclear::NuclearTarget target;
  target.gamma_single = c.get_double("nuclear.gamma_single");
  target.dipole = c.get_double("nuclear.dipole");
  target.transition_energy_ev = c.get_double("nuclear.energy_ev");
  target.grazing_angle = c.get_double("nuclear.grazing_angle");
  target.beam_width = c.get_double("nuclear.beam_width");
  target.layer_thickness = c.get_double("nuclear.layer_thickness");
  target.quality_factor = c.get_double("nuclear.quality_factor");
  target.iron_density = c.get_double("nuclear.iron_density");
  target.coherent_nuclei = c.get_double("nuclear.coherent_nuclei");

  nuclear::XrayPulseSpec spec;
  spec.duration = c.get_double("nuclear.duration");
  spec.delay = c.get_double("nuclear.delay");
  spec.n_res = c.get_double("nuclear.n_res");
  spec.second_fraction = c.get_double("nuclear.second_fraction");

  nuclear::NuclearScenarioOptions opts;
  opts.steps_per_sigma = c.get_int("nuclear.steps_per_sigma");
  opts.curve_points = c.get_size("nuclear.curve_points");

  Csv curve(dir / "decay_curve.csv", {"phi", "t", "reference", "signal"});
  Csv terms(dir / "breakdown.csv", {"phi", "r_sd", "r_se", "r_ab", "r_phi1", "r_phi2", "n_se", "event_rate",
                                    "rho22_reference", "rho22_signal", "d_reference", "d_signal", "delta_d"});
  json runs = json::array();
  json head;
  for (double phi : c.get_list("nuclear.phases")) {
    spec.phase = phi;
    const auto r = nuclear::run_nuclear_scenario(spec, target, opts);
    for (const auto& p : r.decay_curve) curve.row({phi, p.time, p.reference, p.signal});
    const auto& b = r.breakdown;
    terms.row({phi, b.spontaneous_decay, b.stimulated, b.absorption, b.phase_first, b.phase_second,
               r.stimulated_photons, r.event_rate, r.rho22_reference, r.rho22_signal, r.reference.value,
               r.signal.value, r.delta_d});
    runs.push_back({{"phi", phi},
                    {"delta_d", r.delta_d},
                    {"d_reference", r.reference.value},
                    {"d_signal", r.signal.value},
                    {"rho22_reference", r.rho22_reference},
                    {"rho22_signal", r.rho22_signal},
                    {"stimulated_photons", r.stimulated_photons},
                    {"event_rate", r.event_rate},
                    {"max_trace_drift", r.max_trace_drift},
                    {"warnings", b.warnings}});
    head = {{"amplitude", r.broadband.amplitude},
            {"ratio_single", r.broadband.ratio_single},
            {"ratio_collective", r.broadband.ratio_collective},
            {"spectral_width_ev", spec.spectral_width() * nuclear::si::hbar / nuclear::si::electron_volt},
            {"linewidth_ev", target.gamma_single * nuclear::si::hbar / nuclear::si::electron_volt},
            {"gamma_collective", target.gamma_collective()},
            {"wigner_weisskopf_3d", nuclear::wigner_weisskopf_3d(target.omega(), target.dipole)},
            {"coherence_volumes", target.coherence_volumes()},
            {"irradiated_nuclei", target.irradiated_nuclei()},
            {"peak_rabi", r.rabi_peak},
            {"t_start", r.t_start},
            {"t_end", r.t_end},
            {"warnings", r.broadband.warnings}};
  }
  head["runs"] = runs;
  return head;
}

json dispatch(const std::string& name, const Config& c, const std::filesystem::path& dir) {
  if (name == "free-wp") return run_free_wp(c, dir);
  if (name == "spon-decay") return run_spon_decay(c, dir);
  if (name == "stim-early" || name == "stim-late") return run_stimulated(c, dir);
  if (name == "double-pulse") return run_double_pulse(c, dir);
  if (name == "phase-scan") return run_phase_scan(c, dir);
  if (name == "semiclassical-compare") return run_semiclassical_compare(c, dir);
  if (name == "perturbative-breakdown") return run_perturbative_breakdown(c, dir);
  return run_nuclear(c, dir);
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

const std::vector<ScenarioInfo>& list_scenarios() {
  static const std::vector<ScenarioInfo> infos = [] {
    std::vector<ScenarioInfo> v;
    for (const auto& s : specs()) v.push_back(s.info);
    return v;
  }();
  return infos;
}

const ScenarioInfo& find_scenario(const std::string& name) {
  const auto& all = list_scenarios();
  const auto& spec = find_spec(name);
  return all[static_cast<std::size_t>(&spec - specs().data())];
}

Config default_config(const std::string& scenario) {
  const auto& spec = find_spec(scenario);
  std::vector<ConfigEntry> schema;
  for (const auto& e : full_schema()) {
    const auto section = e.key.substr(0, e.key.find('.'));
    if (std::find(spec.sections.begin(), spec.sections.end(), section) != spec.sections.end())
      schema.push_back(e);
  }
  Config c(schema);
  for (const auto& [k, v] : spec.overrides) c.set(k, v);
  return c;
}

json run_scenario(const std::string& scenario, const Config& config, const std::filesystem::path& out_dir) {
  find_spec(scenario);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw ConfigError("output", "cannot create " + out_dir.string() + ": " + ec.message());

  json summary = dispatch(scenario, config, out_dir);
  summary["scenario"] = scenario;
  write_json(out_dir / "summary.json", summary);

  json manifest = {{"scenario", scenario},
                   {"figure", find_scenario(scenario).figure},
                   {"config", config.values()},
                   {"created", utc_timestamp()}};
  write_json(out_dir / "manifest.json", manifest);
  return summary;
}

}  // namespace stimem
