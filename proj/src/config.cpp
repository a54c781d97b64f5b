#include "esa/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include "esa/errors.hpp"

namespace esa {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

struct Entry {
    std::string key, value;
    int line;
};

std::vector<Entry> parse_kv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::vector<Entry> entries;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path + ":" + std::to_string(line) +
                              ": expected 'key = value', got '" + text + "'");
        }
        entries.push_back({trim(text.substr(0, eq)), trim(text.substr(eq + 1)), line});
    }
    return entries;
}

class ValueParser {
  public:
    ValueParser(const std::string& path, const Entry& e) : path_(path), entry_(e) {}

    [[noreturn]] void fail(const std::string& why) const {
        throw ConfigError(path_ + ":" + std::to_string(entry_.line) + ": key '" + entry_.key +
                          "': " + why);
    }

    double as_double() const {
        const std::string& v = entry_.value;
        if (v == "-inf") return -std::numeric_limits<double>::infinity();
        try {
            std::size_t used = 0;
            const double d = std::stod(v, &used);
            if (used != v.size()) fail("trailing characters in number '" + v + "'");
            return d;
        } catch (const std::logic_error&) {
            fail("not a number: '" + v + "'");
        }
    }

    long long as_int() const {
        const std::string& v = entry_.value;
        try {
            std::size_t used = 0;
            const long long i = std::stoll(v, &used);
            if (used != v.size()) fail("trailing characters in integer '" + v + "'");
            return i;
        } catch (const std::logic_error&) {
            fail("not an integer: '" + v + "'");
        }
    }

    std::vector<std::string> as_list() const {
        std::vector<std::string> parts;
        std::stringstream ss(entry_.value);
        std::string part;
        while (std::getline(ss, part, ',')) {
            part = trim(part);
            if (!part.empty()) parts.push_back(part);
        }
        return parts;
    }

    std::vector<int> as_int_list() const {
        std::vector<int> out;
        for (const auto& p : as_list()) {
            try {
                out.push_back(std::stoi(p));
            } catch (const std::logic_error&) {
                fail("not an integer list element: '" + p + "'");
            }
        }
        return out;
    }

    std::vector<double> as_double_list() const {
        std::vector<double> out;
        for (const auto& p : as_list()) {
            try {
                out.push_back(std::stod(p));
            } catch (const std::logic_error&) {
                fail("not a number list element: '" + p + "'");
            }
        }
        return out;
    }

    const std::string& str() const { return entry_.value; }

  private:
    const std::string& path_;
    const Entry& entry_;
};

}  // namespace

RunConfig load_run_config(const std::string& path) {
    RunConfig cfg;
    bool have_positive = false, have_negative = false;
    for (const Entry& e : parse_kv(path)) {
        ValueParser v(path, e);
        const std::string& k = e.key;
        if (k == "name") cfg.name = v.str();
        else if (k == "dataset") cfg.dataset = v.str();
        else if (k == "images") cfg.images = v.str();
        else if (k == "labels") cfg.labels = v.str();
        else if (k == "synth_classes") cfg.synth_classes = int(v.as_int());
        else if (k == "synth_dim") cfg.synth_dim = int(v.as_int());
        else if (k == "synth_per_class") cfg.synth_per_class = int(v.as_int());
        else if (k == "synth_scale") cfg.synth_scale = v.as_double();
        else if (k == "synth_spread") cfg.synth_spread = v.as_double();
        else if (k == "positive_classes") { cfg.positive_classes = v.as_int_list(); have_positive = true; }
        else if (k == "negative_class") { cfg.negative_class = int(v.as_int()); have_negative = true; }
        else if (k == "n_labeled") cfg.n_labeled = int(v.as_int());
        else if (k == "n_unlabeled") cfg.n_unlabeled = int(v.as_int());
        else if (k == "theta") cfg.theta = v.as_double();
        else if (k == "mu") cfg.mu = v.as_double();
        else if (k == "method") cfg.train.method = method_from_name(v.str());
        else if (k == "loss") cfg.train.loss = loss_from_name(v.str());
        else if (k == "hidden") cfg.train.hidden = v.as_int_list();
        else if (k == "epochs") cfg.train.epochs = int(v.as_int());
        else if (k == "batch_size") cfg.train.batch_size = int(v.as_int());
        else if (k == "optimizer") {
            if (v.str() == "adadelta") cfg.train.optimizer.kind = OptKind::Adadelta;
            else if (v.str() == "sgd") cfg.train.optimizer.kind = OptKind::Sgd;
            else v.fail("expected adadelta or sgd, got '" + v.str() + "'");
        }
        else if (k == "learning_rate") cfg.train.optimizer.lr = v.as_double();
        else if (k == "momentum") cfg.train.optimizer.momentum = v.as_double();
        else if (k == "rho") cfg.train.optimizer.rho = v.as_double();
        else if (k == "epsilon") cfg.train.optimizer.eps = v.as_double();
        else if (k == "sigma_m") cfg.train.thresholds.sigma_m = v.as_double();
        else if (k == "sigma_u") cfg.train.thresholds.sigma_u = v.as_double();
        else if (k == "sieve_start_epoch") cfg.train.sieve_start_epoch = int(v.as_int());
        else if (k == "seed") cfg.train.seed = std::uint64_t(v.as_int());
        else if (k == "repeats") cfg.repeats = int(v.as_int());
        else if (k == "output") cfg.output = v.str();
        else if (k == "axis") cfg.axis = v.str();
        else if (k == "axis_values") cfg.axis_values = v.as_double_list();
        else v.fail("unknown key");

        if (k == "repeats" && cfg.repeats < 1) v.fail("repeats must be >= 1");
        if (k == "dataset" && cfg.dataset != "idx" && cfg.dataset != "synth") {
            v.fail("expected idx or synth, got '" + cfg.dataset + "'");
        }
    }

    if (cfg.dataset.empty()) {
        throw ConfigError(path + ": missing required key 'dataset' (idx or synth)");
    }
    if (cfg.dataset == "idx" && (cfg.images.empty() || cfg.labels.empty())) {
        throw ConfigError(path + ": dataset = idx requires 'images' and 'labels' paths");
    }
    if (!have_positive || !have_negative) {
        throw ConfigError(path + ": 'positive_classes' and 'negative_class' are required");
    }
    if (cfg.n_labeled < 1 || cfg.n_unlabeled < 1) {
        throw ConfigError(path + ": 'n_labeled' and 'n_unlabeled' must be >= 1");
    }
    if (cfg.name.empty()) cfg.name = cfg.dataset;
    return cfg;
}

GenConfig load_gen_config(const std::string& path) {
    GenConfig cfg;
    for (const Entry& e : parse_kv(path)) {
        ValueParser v(path, e);
        const std::string& k = e.key;
        if (k == "classes") cfg.classes = int(v.as_int());
        else if (k == "rows") cfg.rows = int(v.as_int());
        else if (k == "cols") cfg.cols = int(v.as_int());
        else if (k == "per_class") cfg.per_class = int(v.as_int());
        else if (k == "separation") cfg.separation = v.as_double();
        else if (k == "noise") cfg.noise = v.as_double();
        else if (k == "seed") cfg.seed = std::uint64_t(v.as_int());
        else if (k == "images") cfg.images = v.str();
        else if (k == "labels") cfg.labels = v.str();
        else v.fail("unknown key");
    }
    if (cfg.images.empty() || cfg.labels.empty()) {
        throw ConfigError(path + ": 'images' and 'labels' output paths are required");
    }
    return cfg;
}

}  // namespace esa
