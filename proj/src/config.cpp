#include "xma/config.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <set>
#include <sstream>

#include "xma/errors.hpp"
#include "xma/io.hpp"

namespace xma {
namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    std::uint64_t out = 0;
    const auto* first = value.data();
    const auto* last = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || ptr != last)
        throw ConfigError("invalid integer for " + key + ": '" + value + "'");
    return out;
}

double parse_f64(const std::string& key, const std::string& value) {
    double out = 0.0;
    const auto* first = value.data();
    const auto* last = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || ptr != last)
        throw ConfigError("invalid number for " + key + ": '" + value + "'");
    return out;
}

std::string format_f64(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

struct KeyBinding {
    std::string name;
    std::function<void(ExperimentConfig&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

std::vector<KeyBinding> bindings() {
    std::vector<KeyBinding> keys;
    auto add = [&keys](std::string name, auto set, auto get) {
        keys.push_back({std::move(name), std::move(set), std::move(get)});
    };

    auto uint_field = [&add](std::string name, auto accessor) {
        add(
            name,
            [name, accessor](ExperimentConfig& c, const std::string& v) {
                using Field = std::remove_reference_t<decltype(*accessor(c))>;
                *accessor(c) = Field(parse_u64(name, v));
            },
            [accessor](const ExperimentConfig& c) {
                auto& mutable_c = const_cast<ExperimentConfig&>(c);
                return std::to_string(*accessor(mutable_c));
            });
    };
    auto f64_field = [&add](std::string name, auto accessor) {
        add(
            name,
            [name, accessor](ExperimentConfig& c, const std::string& v) {
                *accessor(c) = parse_f64(name, v);
            },
            [accessor](const ExperimentConfig& c) {
                auto& mutable_c = const_cast<ExperimentConfig&>(c);
                return format_f64(*accessor(mutable_c));
            });
    };

    uint_field("dataset.classes", [](ExperimentConfig& c) { return &c.dataset.classes; });
    uint_field("dataset.clips_per_class",
               [](ExperimentConfig& c) { return &c.dataset.clips_per_class; });
    uint_field("dataset.timesteps",
               [](ExperimentConfig& c) { return &c.dataset.timesteps; });
    uint_field("dataset.visual_dim",
               [](ExperimentConfig& c) { return &c.dataset.visual_dim; });
    uint_field("dataset.audio_dim",
               [](ExperimentConfig& c) { return &c.dataset.audio_dim; });
    uint_field("dataset.latent_dim",
               [](ExperimentConfig& c) { return &c.dataset.latent_dim; });
    f64_field("dataset.p_event", [](ExperimentConfig& c) { return &c.dataset.p_event; });
    f64_field("dataset.sigma", [](ExperimentConfig& c) { return &c.dataset.sigma; });
    f64_field("dataset.distractor",
              [](ExperimentConfig& c) { return &c.dataset.distractor; });
    f64_field("dataset.selection_threshold",
              [](ExperimentConfig& c) { return &c.selection_threshold; });

    uint_field("visual.hidden_dim", [](ExperimentConfig& c) { return &c.visual_hidden; });
    uint_field("visual.embed_dim", [](ExperimentConfig& c) { return &c.embed_dim; });
    uint_field("visual.noise_dim", [](ExperimentConfig& c) { return &c.noise_dim; });
    uint_field("visual.generator_hidden",
               [](ExperimentConfig& c) { return &c.generator_hidden; });
    uint_field("visual.pretrain_epochs",
               [](ExperimentConfig& c) { return &c.pretrain_epochs; });

    uint_field("audio.hidden_dim", [](ExperimentConfig& c) { return &c.audio_hidden; });
    uint_field("audio.trunk_dim",
               [](ExperimentConfig& c) { return &c.audio_trunk_dim; });

    uint_field("train.batch_size",
               [](ExperimentConfig& c) { return &c.train.batch_size; });
    f64_field("train.lr", [](ExperimentConfig& c) { return &c.train.lr; });
    f64_field("train.weight_decay",
              [](ExperimentConfig& c) { return &c.train.weight_decay; });
    uint_field("train.epochs", [](ExperimentConfig& c) { return &c.train.epochs; });
    uint_field("train.patience", [](ExperimentConfig& c) { return &c.train.patience; });
    add(
        "train.loss_variant",
        [](ExperimentConfig& c, const std::string& v) {
            const double tau = c.train.variant.temperature;
            if (v == "total_l2nce")
                c.train.variant = LossVariant::total();
            else if (v == "nce_cosine")
                c.train.variant = LossVariant::nce_cosine(tau);
            else if (v == "l2_only")
                c.train.variant = LossVariant::l2_only();
            else
                throw ConfigError("unknown loss variant '" + v + "'");
        },
        [](const ExperimentConfig& c) { return loss_variant_name(c.train.variant); });
    add(
        "train.temperature",
        [](ExperimentConfig& c, const std::string& v) {
            const double tau = parse_f64("train.temperature", v);
            if (!(tau > 0.0)) throw ConfigError("temperature must be positive");
            c.train.variant.temperature = tau;
        },
        [](const ExperimentConfig& c) {
            return format_f64(c.train.variant.temperature);
        });
    add(
        "train.pair_source",
        [](ExperimentConfig& c, const std::string& v) {
            if (v == "selected_top1")
                c.train.pair_source = PairSource::SelectedTop1;
            else if (v == "mid_frame")
                c.train.pair_source = PairSource::MidFrame;
            else
                throw ConfigError("unknown pair source '" + v + "'");
        },
        [](const ExperimentConfig& c) { return pair_source_name(c.train.pair_source); });
    uint_field("train.duration_timesteps",
               [](ExperimentConfig& c) { return &c.train.duration_timesteps; });

    uint_field("eval.is_splits", [](ExperimentConfig& c) { return &c.eval_is_splits; });
    uint_field("eval.classifier_epochs",
               [](ExperimentConfig& c) { return &c.eval_classifier_epochs; });
    f64_field("eval.classifier_lr",
              [](ExperimentConfig& c) { return &c.eval_classifier_lr; });

    add(
        "seed",
        [](ExperimentConfig& c, const std::string& v) { c.seed = parse_u64("seed", v); },
        [](const ExperimentConfig& c) { return std::to_string(c.seed); });
    return keys;
}

} // namespace

ModelDims ExperimentConfig::dims() const {
    ModelDims d;
    d.visual_dim = dataset.visual_dim;
    d.visual_hidden = visual_hidden;
    d.embed_dim = embed_dim;
    d.noise_dim = noise_dim;
    d.generator_hidden = generator_hidden;
    d.audio_dim = dataset.audio_dim;
    d.audio_hidden = audio_hidden;
    d.audio_trunk_dim = audio_trunk_dim;
    return d;
}

PretrainConfig ExperimentConfig::pretrain() const {
    PretrainConfig p;
    p.epochs = pretrain_epochs;
    p.batch_size = train.batch_size;
    p.lr = train.lr;
    p.weight_decay = train.weight_decay;
    return p;
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig config;
    config.dataset.seed = 0; // dataset seed follows the top-level seed
    const auto keys = bindings();
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) +
                              " is not 'key = value'");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        const auto it =
            std::find_if(keys.begin(), keys.end(),
                         [&key](const KeyBinding& b) { return b.name == key; });
        if (it == keys.end()) throw ConfigError("unknown config key '" + key + "'");
        if (!seen.insert(key).second)
            throw ConfigError("duplicate config key '" + key + "'");
        it->set(config, value);
    }
    config.dataset.seed = config.seed;
    return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config: " + path.string());
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_config_text(buf.str());
}

std::vector<std::pair<std::string, std::string>> echo_config(
    const ExperimentConfig& config) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const KeyBinding& b : bindings()) out.emplace_back(b.name, b.get(config));
    return out;
}

std::string loss_variant_name(const LossVariant& variant) {
    switch (variant.tag) {
    case LossVariantTag::TotalL2Nce: return "total_l2nce";
    case LossVariantTag::NceCosine: return "nce_cosine";
    case LossVariantTag::L2Only: return "l2_only";
    }
    throw ConfigError("unknown loss variant tag");
}

std::string pair_source_name(PairSource source) {
    switch (source) {
    case PairSource::SelectedTop1: return "selected_top1";
    case PairSource::MidFrame: return "mid_frame";
    }
    throw ConfigError("unknown pair source");
}

} // namespace xma
