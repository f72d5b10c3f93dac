#include "rispls/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

namespace rispls {

namespace {

// shortest form that round-trips exactly
void write_double(std::ostream& out, double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    out.write(buf, res.ptr - buf);
}

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& s, int line_no) {
    try {
        std::size_t used = 0;
        const double x = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return x;
    } catch (const std::exception&) {
        throw Error("CSV line " + std::to_string(line_no) + ": bad number '" + s + "'");
    }
}

int parse_int(const std::string& s, int line_no) {
    try {
        std::size_t used = 0;
        const int x = std::stoi(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return x;
    } catch (const std::exception&) {
        throw Error("CSV line " + std::to_string(line_no) + ": bad integer '" + s + "'");
    }
}

}  // namespace

Scenario parse_scenario(const std::string& name) {
    if (name == "with-ris") return Scenario::WithLegitRis;
    if (name == "no-ris") return Scenario::NoLegitRis;
    throw DomainError("unknown scenario '" + name + "' (expected with-ris or no-ris)");
}

std::string scenario_name(Scenario scenario) {
    return scenario == Scenario::WithLegitRis ? "with-ris" : "no-ris";
}

void SweepSpec::validate() const {
    if (snr_grid_db.empty()) throw DomainError("SNR grid must not be empty");
    if (trials < 1) throw DomainError("trials must be at least 1");
    if (threads < 1) throw DomainError("threads must be at least 1");
    for (double s : snr_grid_db) {
        if (!std::isfinite(s)) throw DomainError("SNR grid entries must be finite");
    }
    config.validate();
    geometry.validate();
    if (scenario == Scenario::WithLegitRis && config.l_ris < 1) {
        throw DomainError("scenario with-ris needs l_ris >= 1");
    }
    if (!(ao.rel_tol > 0)) throw DomainError("rel_tol must be positive");
    ao.manifold.validate();
    eaves.manifold.validate();
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t snr_index, std::size_t trial_index) {
    return derive_seed(master_seed, {std::uint64_t(snr_index), std::uint64_t(trial_index)});
}

TrialResult run_trial(const SweepSpec& spec, std::size_t snr_index, int trial_index, std::string* failure) {
    const auto start = std::chrono::steady_clock::now();
    TrialResult r;
    r.snr_db = spec.snr_grid_db.at(snr_index);
    r.trial_index = trial_index;

    SystemConfig cfg = spec.config;
    cfg.noise_var = 1.0;
    cfg.power = std::pow(10.0, r.snr_db / 10.0);
    if (spec.scenario == Scenario::NoLegitRis) cfg.l_ris = 0;
    const std::uint64_t seed = trial_seed(spec.master_seed, snr_index, std::size_t(trial_index));

    try {
        const auto ch = sample_channels<double>(cfg, spec.geometry, seed);
        const auto sol = spec.scenario == Scenario::WithLegitRis ? solve_op_l(ch, cfg, spec.ao, seed)
                                                                 : solve_no_ris(ch, cfg, spec.ao, seed);
        const auto& d = sol.design;
        const auto eve = design_eavesdropper(ch, cfg, d.n_d, spec.eaves);

        const CMatrix<double> h_eff = legitimate_channel(ch, d.phi);
        const CMatrix<double> h_e_eff = effective_eavesdrop(ch.h_e, ch.g2, eve.design.psi, ch.g1);
        r.rate_rx = rate_rx(d.u, h_eff, d.v, d.z_cov, cfg.noise_var);
        r.rate_e = rate_e(eve.design.w, h_e_eff, d.v, d.z_cov, cfg.noise_var);
        r.secrecy = secrecy_rate(r.rate_rx, r.rate_e);
        r.nd_selected = d.n_d;
        r.inner_iters = sol.inner_iterations;
    } catch (const Error& e) {
        r = TrialResult{};
        r.snr_db = spec.snr_grid_db[snr_index];
        r.trial_index = trial_index;
        r.ok = false;
        if (failure) *failure = e.what();
    }
    if (spec.record_timing) {
        r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    return r;
}

std::vector<SnrAggregate> aggregate(const std::vector<TrialResult>& trials) {
    std::vector<SnrAggregate> out;
    for (const auto& t : trials) {
        auto it = std::find_if(out.begin(), out.end(), [&](const SnrAggregate& a) { return a.snr_db == t.snr_db; });
        if (it == out.end()) {
            out.push_back({});
            out.back().snr_db = t.snr_db;
            it = out.end() - 1;
        }
        if (!t.ok) {
            ++it->failures;
            continue;
        }
        ++it->trials;
        it->mean_rate_rx += t.rate_rx;
        it->mean_rate_e += t.rate_e;
        it->mean_secrecy += t.secrecy;
    }
    for (auto& a : out) {
        if (a.trials == 0) continue;
        a.mean_rate_rx /= a.trials;
        a.mean_rate_e /= a.trials;
        a.mean_secrecy /= a.trials;
    }
    return out;
}

SweepResult run_sweep(const SweepSpec& spec) {
    spec.validate();
    const std::size_t n_snr = spec.snr_grid_db.size();
    const std::size_t total = n_snr * std::size_t(spec.trials);
    SweepResult out;
    out.trials.resize(total);
    std::vector<std::string> messages(total);

    // Results land in fixed slots, so the output does not depend on the
    // thread count or on completion order.
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < total; i = next++) {
            const std::size_t s = i / std::size_t(spec.trials);
            const int t = int(i % std::size_t(spec.trials));
            out.trials[i] = run_trial(spec, s, t, &messages[i]);
        }
    };
    const int n_threads = std::min<int>(spec.threads, int(total));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int k = 0; k < n_threads; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    for (std::size_t i = 0; i < total; ++i) {
        if (!out.trials[i].ok) {
            std::ostringstream msg;
            msg << "snr " << out.trials[i].snr_db << " dB, trial " << out.trials[i].trial_index << ": " << messages[i];
            out.failure_messages.push_back(msg.str());
        }
    }
    out.aggregate = aggregate(out.trials);
    return out;
}

void write_csv(const std::vector<TrialResult>& results, std::ostream& out) {
    out << kTrialCsvHeader << '\n';
    for (const auto& r : results) {
        write_double(out, r.snr_db);
        out << ',' << r.trial_index << ',';
        write_double(out, r.rate_rx);
        out << ',';
        write_double(out, r.rate_e);
        out << ',';
        write_double(out, r.secrecy);
        out << ',' << r.nd_selected << ',' << r.inner_iters << ',';
        write_double(out, r.wall_time_s);
        out << ',' << (r.ok ? 1 : 0) << '\n';
    }
    if (!out) throw Error("failed writing trial CSV");
}

void write_csv(const std::vector<TrialResult>& results, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    write_csv(results, out);
    out.close();
    if (!out) throw Error("failed writing " + path.string());
}

std::vector<TrialResult> read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error("CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kTrialCsvHeader) throw Error("CSV header mismatch: '" + line + "'");
    std::vector<TrialResult> out;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_row(line);
        if (cells.size() != 9) throw Error("CSV line " + std::to_string(line_no) + ": expected 9 columns");
        TrialResult r;
        r.snr_db = parse_double(cells[0], line_no);
        r.trial_index = parse_int(cells[1], line_no);
        r.rate_rx = parse_double(cells[2], line_no);
        r.rate_e = parse_double(cells[3], line_no);
        r.secrecy = parse_double(cells[4], line_no);
        r.nd_selected = parse_int(cells[5], line_no);
        r.inner_iters = parse_int(cells[6], line_no);
        r.wall_time_s = parse_double(cells[7], line_no);
        r.ok = parse_int(cells[8], line_no) != 0;
        out.push_back(r);
    }
    return out;
}

std::vector<TrialResult> read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    return read_csv(in);
}

void write_aggregate_csv(const std::vector<SnrAggregate>& rows, std::ostream& out) {
    out << kAggregateCsvHeader << '\n';
    for (const auto& a : rows) {
        write_double(out, a.snr_db);
        out << ',' << a.trials << ',' << a.failures << ',';
        write_double(out, a.mean_rate_rx);
        out << ',';
        write_double(out, a.mean_rate_e);
        out << ',';
        write_double(out, a.mean_secrecy);
        out << '\n';
    }
}

void write_channels_csv(const ChannelSet<double>& ch, std::ostream& out) {
    auto block = [&](const char* name, const CMatrix<double>& m) {
        out << name << ',' << m.rows() << ',' << m.cols() << '\n';
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index j = 0; j < m.cols(); ++j) {
                if (j) out << ',';
                write_double(out, m(i, j).real());
                out << ',';
                write_double(out, m(i, j).imag());
            }
            out << '\n';
        }
    };
    block("h", ch.h);
    block("h1", ch.h1);
    block("h2", ch.h2);
    block("h_e", ch.h_e);
    block("g1", ch.g1);
    block("g2", ch.g2);
}

void write_ao_trace_csv(const std::vector<AoTraceRow>& rows, std::ostream& out) {
    out << "iteration,n_d,surrogate,power_excess,combiner_excess,modulus_error\n";
    for (const auto& r : rows) {
        out << r.iteration << ',' << r.n_d << ',';
        write_double(out, r.surrogate);
        out << ',';
        write_double(out, r.power_excess);
        out << ',';
        write_double(out, r.combiner_excess);
        out << ',';
        write_double(out, r.modulus_error);
        out << '\n';
    }
}

void write_manifold_trace_csv(const std::vector<ManifoldTraceRow>& rows, std::ostream& out) {
    out << "iteration,value,grad_norm,step,decrease,bound\n";
    for (const auto& r : rows) {
        out << r.iteration << ',';
        write_double(out, r.value);
        out << ',';
        write_double(out, r.grad_norm);
        out << ',';
        write_double(out, r.step);
        out << ',';
        write_double(out, r.decrease);
        out << ',';
        write_double(out, r.bound);
        out << '\n';
    }
}

}  // namespace rispls
