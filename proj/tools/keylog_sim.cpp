// keylog_sim: batch experiment runner exposing every protocol with
// reproducible configuration and machine-readable (JSON / CSV) output.

#include <CLI11.hpp>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "keylog/protocols.hpp"
#include "keylog/version.hpp"

namespace {

using keylog::Backend;
using keylog::Complex;
using keylog::PauliLetter;

struct Options {
    std::string protocol;
    int n = 1;
    std::string beta = "0,0";
    std::string letter;
    double theta = 0.0;
    std::string bits = "00";
    std::string backend = "fock";
    double delta = 0.25;
    int cutoff = 150;
    int smax = 0;
    std::uint64_t seed = 0;
    std::string output;
    std::string format = "json";
    std::string config_file;
    int workers = 0;
    bool crosskerr_postselect = true;
    bool use_crosskerr = false;
    // sweep grids, comma separated
    std::string letters = "I,X,Y,Z";
    std::string deltas = "0.5,0.35,0.25";
    std::string cutoffs = "150";
    std::string nvalues = "1";
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---- formatting helpers (byte-stable output contract) ----

std::string sig12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string fixed12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12f", v);
    return buf;
}

std::string json_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    return out;
}

std::string json_str(const std::string& s) {
    return "\"" + json_escape(s) + "\"";
}

std::string json_array(const Eigen::VectorXd& v) {
    std::string out = "[";
    for (int i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += sig12(v(i));
    }
    return out + "]";
}

// ---- parsing helpers ----

Complex parse_complex(const std::string& s) {
    std::size_t comma = s.find(',');
    if (comma == std::string::npos) {
        throw ConfigError("complex value must be \"re,im\": " + s);
    }
    try {
        std::size_t used = 0;
        const double re = std::stod(s.substr(0, comma), &used);
        const double im = std::stod(s.substr(comma + 1), &used);
        return {re, im};
    } catch (const std::exception&) {
        throw ConfigError("cannot parse complex value: " + s);
    }
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    if (out.empty()) throw ConfigError("empty list: " + s);
    return out;
}

PauliLetter parse_letter_checked(const std::string& s) {
    try {
        return keylog::parse_letter(s);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
}

Backend parse_backend(const std::string& s) {
    if (s == "exact") return Backend::ExactAlgebra;
    if (s == "fock") return Backend::FockNumeric;
    throw ConfigError("backend must be exact or fock: " + s);
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{}
                                          : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (!key.empty()) kv[key] = val;
    }
    return kv;
}

void atomic_write(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw keylog::IoFailure("cannot open for writing: " + tmp);
        out << content;
        if (!out) throw keylog::IoFailure("write failed: " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw keylog::IoFailure("rename failed: " + path);
}

// ---- document assembly ----

std::string config_json(const Options& opt) {
    std::string s = "{";
    s += "\"n\":" + std::to_string(opt.n);
    s += ",\"beta\":" + json_str(opt.beta);
    s += ",\"letter\":" + json_str(opt.letter);
    s += ",\"theta\":" + sig12(opt.theta);
    s += ",\"bits\":" + json_str(opt.bits);
    s += ",\"backend\":" + json_str(opt.backend);
    s += ",\"gkp\":{\"delta\":" + sig12(opt.delta) +
         ",\"cutoff\":" + std::to_string(opt.cutoff) +
         ",\"s_max\":" + std::to_string(opt.smax) + "}";
    s += ",\"seed\":" + std::to_string(opt.seed);
    s += ",\"format\":" + json_str(opt.format);
    s += ",\"workers\":" + std::to_string(opt.workers);
    s += ",\"crosskerr_postselect\":";
    s += opt.crosskerr_postselect ? "true" : "false";
    s += "}";
    return s;
}

std::string wrap_document(const Options& opt, const std::string& result) {
    std::string s = "{";
    s += "\"protocol\":" + json_str(opt.protocol);
    s += ",\"config\":" + config_json(opt);
    s += ",\"result\":" + result;
    s += ",\"version\":" + json_str(keylog::kVersion);
    s += "}\n";
    return s;
}

std::string distribution_csv(const Eigen::VectorXd& p) {
    std::string s = "k,probability\n";
    for (int k = 0; k < p.size(); ++k) {
        s += std::to_string(k) + "," + fixed12(p(k)) + "\n";
    }
    return s;
}

keylog::QpeConfig make_qpe_config(const Options& opt) {
    keylog::QpeConfig c;
    c.n = opt.n;
    c.beta = parse_complex(opt.beta);
    c.backend = parse_backend(opt.backend);
    c.gkp.delta = opt.delta;
    c.gkp.cutoff = opt.cutoff;
    c.gkp.s_max = opt.smax;
    c.crosskerr_postselect = opt.crosskerr_postselect;
    return c;
}

std::string qpe_result_json(const keylog::QpeOutcome& out) {
    std::string s = "{";
    s += "\"distribution\":" + json_array(out.distribution);
    s += ",\"ell\":" + std::to_string(out.ell);
    s += ",\"delta\":" + sig12(out.delta);
    s += ",\"leakage_max\":" + sig12(out.leakage_max);
    s += "}";
    return s;
}

struct RunOutput {
    std::string json_result;  // "result" object body
    std::string csv;
    std::string summary;
};

RunOutput run_superdense(const Options& opt) {
    if (opt.bits.size() != 2 ||
        (opt.bits[0] != '0' && opt.bits[0] != '1') ||
        (opt.bits[1] != '0' && opt.bits[1] != '1')) {
        throw ConfigError("--bits must be two binary digits");
    }
    const auto res =
        keylog::superdense_dv({opt.bits[0] - '0', opt.bits[1] - '0'});
    const std::string decoded = std::to_string(res.decoded[0]) +
                                std::to_string(res.decoded[1]);
    const std::string zz = std::to_string(res.zz_outcome[0]) +
                           std::to_string(res.zz_outcome[1]);
    RunOutput out;
    out.json_result =
        "{\"decoded\":" + json_str(decoded) + ",\"zz_outcome\":" +
        json_str(zz) + "}";
    out.csv = "decoded,zz_outcome\n" + decoded + "," + zz + "\n";
    out.summary = "superdense bits=" + opt.bits + " zz=" + zz +
                  " decoded=" + decoded;
    return out;
}

RunOutput run_qpe_standard(const Options& opt) {
    const auto res = keylog::qpe_standard(opt.n, opt.theta);
    RunOutput out;
    out.json_result = qpe_result_json(res);
    out.csv = distribution_csv(res.distribution);
    int k = 0;
    res.distribution.maxCoeff(&k);
    out.summary = "qpe-standard n=" + std::to_string(opt.n) + " ell=" +
                  std::to_string(res.ell) + " argmax=" + std::to_string(k);
    return out;
}

RunOutput run_qpe_oneshot(const Options& opt, bool crosskerr) {
    const auto config = make_qpe_config(opt);
    const Complex alpha =
        keylog::make_pauli(parse_letter_checked(opt.letter)).alpha;
    const auto res = crosskerr ? keylog::qpe_crosskerr(config, alpha)
                               : keylog::qpe_oneshot(config, alpha);
    RunOutput out;
    out.json_result = qpe_result_json(res);
    out.csv = distribution_csv(res.distribution);
    int k = 0;
    res.distribution.maxCoeff(&k);
    out.summary = opt.protocol + " letter=" + opt.letter + " argmax=" +
                  std::to_string(k) + " leakage=" + sig12(res.leakage_max);
    return out;
}

RunOutput run_attack(const Options& opt, bool crosskerr) {
    auto config = make_qpe_config(opt);
    config.use_crosskerr = crosskerr;
    const auto report = keylog::keystroke_attack(
        parse_letter_checked(opt.letter), config);
    RunOutput out;
    std::string s = "{";
    s += "\"distribution\":" + json_array(report.run_real.distribution);
    s += ",\"distribution_imag\":" + json_array(report.run_imag.distribution);
    s += ",\"ell\":" + std::to_string(report.run_real.ell);
    s += ",\"delta\":" + sig12(report.run_real.delta);
    s += ",\"inferred_letter\":" +
         json_str(keylog::letter_name(report.inferred_letter));
    s += ",\"codeword_fidelity\":" + sig12(report.codeword_fidelity);
    s += ",\"leakage_max\":" + sig12(report.leakage_max);
    s += "}";
    out.json_result = s;
    out.csv = "run,k,probability\n";
    for (int k = 0; k < report.run_real.distribution.size(); ++k) {
        out.csv += "real," + std::to_string(k) + "," +
                   fixed12(report.run_real.distribution(k)) + "\n";
    }
    for (int k = 0; k < report.run_imag.distribution.size(); ++k) {
        out.csv += "imag," + std::to_string(k) + "," +
                   fixed12(report.run_imag.distribution(k)) + "\n";
    }
    out.summary = "attack letter=" + opt.letter + " inferred=" +
                  std::string(keylog::letter_name(report.inferred_letter)) +
                  " fidelity=" + sig12(report.codeword_fidelity);
    return out;
}

RunOutput run_sweep(const Options& opt) {
    std::vector<PauliLetter> letters;
    for (const auto& s : split_list(opt.letters)) {
        letters.push_back(parse_letter_checked(s));
    }
    std::vector<double> deltas;
    for (const auto& s : split_list(opt.deltas)) deltas.push_back(std::stod(s));
    std::vector<int> cutoffs;
    for (const auto& s : split_list(opt.cutoffs)) {
        cutoffs.push_back(std::stoi(s));
    }
    std::vector<int> nvals;
    for (const auto& s : split_list(opt.nvalues)) nvals.push_back(std::stoi(s));

    int workers = opt.workers;
    if (const char* env = std::getenv("KEYLOG_SIM_THREADS")) {
        workers = std::atoi(env);
    }
    const auto cells = keylog::attack_sweep(letters, deltas, cutoffs, nvals,
                                            make_qpe_config(opt), workers);
    RunOutput out;
    std::string s = "{\"cells\":[";
    out.csv = "letter,delta,cutoff,n,inferred_letter,codeword_fidelity,"
              "leakage_max,error\n";
    int failures = 0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto& c = cells[i];
        if (i) s += ",";
        s += "{\"letter\":" + json_str(keylog::letter_name(c.letter));
        s += ",\"delta\":" + sig12(c.envelope_delta);
        s += ",\"cutoff\":" + std::to_string(c.cutoff);
        s += ",\"n\":" + std::to_string(c.n);
        std::string inferred, fid = "", leak = "";
        if (c.report) {
            inferred = keylog::letter_name(c.report->inferred_letter);
            fid = sig12(c.report->codeword_fidelity);
            leak = sig12(c.report->leakage_max);
            s += ",\"inferred_letter\":" + json_str(inferred);
            s += ",\"codeword_fidelity\":" + fid;
            s += ",\"leakage_max\":" + leak;
        } else {
            ++failures;
        }
        s += ",\"error\":" + json_str(c.error) + "}";
        out.csv += std::string(keylog::letter_name(c.letter)) + "," +
                   sig12(c.envelope_delta) + "," + std::to_string(c.cutoff) +
                   "," + std::to_string(c.n) + "," + inferred + "," + fid +
                   "," + leak + "," + c.error + "\n";
    }
    s += "]}";
    out.json_result = s;
    out.summary = "sweep cells=" + std::to_string(cells.size()) +
                  " failures=" + std::to_string(failures);
    return out;
}

void emit_error(int code, const std::string& message,
                const std::string& context) {
    std::cerr << "{\"code\":" << code << ",\"message\":"
              << json_str(message) << ",\"context\":" << json_str(context)
              << "}" << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
    Options opt;
    CLI::App app{"Two-backend simulator of phase-space keystroke extraction "
                 "from GKP-encoded superdense coding"};
    app.require_subcommand(1);
    app.set_version_flag("--version", keylog::kVersion);

    std::map<std::string, CLI::App*> subs;
    for (const char* name : {"superdense", "qpe-standard", "qpe-oneshot",
                             "qpe-crosskerr", "attack", "sweep"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--n", opt.n, "register size (Fourier order 2^n)");
        sub->add_option("--beta", opt.beta, "displacement, \"re,im\"");
        sub->add_option("--letter", opt.letter, "Pauli letter I|X|Y|Z");
        sub->add_option("--theta", opt.theta, "phase, radians");
        sub->add_option("--bits", opt.bits, "two classical bits, e.g. 10");
        sub->add_option("--backend", opt.backend, "exact | fock");
        sub->add_option("--delta", opt.delta, "GKP envelope width");
        sub->add_option("--cutoff", opt.cutoff, "Fock cutoff N");
        sub->add_option("--smax", opt.smax, "lattice half-width (0 = auto)");
        sub->add_option("--seed", opt.seed, "RNG seed (recorded)");
        sub->add_option("--output", opt.output, "output file path");
        sub->add_option("--format", opt.format, "json | csv");
        sub->add_option("--config", opt.config_file,
                        "key=value config file (flags override)");
        sub->add_option("--workers", opt.workers,
                        "sweep worker count (0 = processors)");
        sub->add_flag("--crosskerr", opt.use_crosskerr,
                      "attack: use the cross-Kerr readout variant");
        sub->add_flag("--no-postselect",
                      [&opt](std::int64_t) { opt.crosskerr_postselect = false; },
                      "report the literal cross-Kerr readout marginal");
        sub->add_option("--letters", opt.letters, "sweep letters list");
        sub->add_option("--deltas", opt.deltas, "sweep envelope list");
        sub->add_option("--cutoffs", opt.cutoffs, "sweep cutoff list");
        sub->add_option("--nvalues", opt.nvalues, "sweep n list");
        subs[name] = sub;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        emit_error(1, e.what(), "argument parsing");
        return 1;
    }

    CLI::App* active = app.get_subcommands().front();
    opt.protocol = active->get_name();

    try {
        if (!opt.config_file.empty()) {
            // flags given on the command line take precedence over the file
            const auto kv = read_config_file(opt.config_file);
            auto fill = [&](const char* flag, auto& slot) {
                const auto it = kv.find(flag + 2);  // strip leading "--"
                if (it == kv.end()) return;
                if (active->count(flag) > 0) return;
                std::stringstream ss(it->second);
                ss >> slot;
                if (ss.fail()) {
                    throw ConfigError(std::string("bad config value for ") +
                                      flag + ": " + it->second);
                }
            };
            fill("--n", opt.n);
            fill("--beta", opt.beta);
            fill("--letter", opt.letter);
            fill("--theta", opt.theta);
            fill("--bits", opt.bits);
            fill("--backend", opt.backend);
            fill("--delta", opt.delta);
            fill("--cutoff", opt.cutoff);
            fill("--smax", opt.smax);
            fill("--seed", opt.seed);
            fill("--output", opt.output);
            fill("--format", opt.format);
            fill("--workers", opt.workers);
            fill("--letters", opt.letters);
            fill("--deltas", opt.deltas);
            fill("--cutoffs", opt.cutoffs);
            fill("--nvalues", opt.nvalues);
        }
        if (opt.format != "json" && opt.format != "csv") {
            throw ConfigError("format must be json or csv");
        }
        if ((opt.protocol == "qpe-oneshot" || opt.protocol == "qpe-crosskerr" ||
             opt.protocol == "attack") &&
            opt.letter.empty()) {
            throw ConfigError("--letter is required for " + opt.protocol);
        }
        (void)parse_backend(opt.backend);

        RunOutput out;
        if (opt.protocol == "superdense") {
            out = run_superdense(opt);
        } else if (opt.protocol == "qpe-standard") {
            out = run_qpe_standard(opt);
        } else if (opt.protocol == "qpe-oneshot") {
            out = run_qpe_oneshot(opt, false);
        } else if (opt.protocol == "qpe-crosskerr") {
            out = run_qpe_oneshot(opt, true);
        } else if (opt.protocol == "attack") {
            out = run_attack(opt, opt.use_crosskerr);
        } else {
            out = run_sweep(opt);
        }

        const std::string document = opt.format == "json"
                                         ? wrap_document(opt, out.json_result)
                                         : out.csv;
        if (opt.output.empty()) {
            opt.output = "keylog_result." + opt.format;
        }
        atomic_write(opt.output, document);
        std::cout << out.summary << std::endl;
        return 0;
    } catch (const ConfigError& e) {
        emit_error(1, e.what(), opt.protocol);
        return 1;
    } catch (const keylog::TruncationRisk& e) {
        emit_error(2, e.what(), opt.protocol);
        return 2;
    } catch (const keylog::EntanglementResidue& e) {
        emit_error(2, e.what(), opt.protocol);
        return 2;
    } catch (const keylog::DimensionGuardExceeded& e) {
        emit_error(2, e.what(), opt.protocol);
        return 2;
    } catch (const keylog::SimError& e) {
        emit_error(1, e.what(), opt.protocol);
        return 1;
    } catch (const std::exception& e) {
        emit_error(2, e.what(), opt.protocol);
        return 2;
    }
}
