#include "run_config.hpp"

#include <charconv>
#include <fstream>
#include <iterator>
#include <map>
#include <set>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "alrn/error.hpp"
#include "alrn/report.hpp"

namespace alrn::cli {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"paths", {"out_dir", "stopwords", "stemmer_rules", "synth_spec", "lexicon"}},
      {"preprocess", {"keep_emoji"}},
      {"synth", {"seed", "generic_train", "generic_test", "domain_train", "domain_pool", "domain_test_per_class"}},
      {"model", {"max_len", "d_model", "n_heads", "n_layers", "d_ff", "dropout_rate", "seed"}},
      {"vocab", {"min_freq", "max_size"}},
      {"pretrain", {"epochs", "batch_size", "learning_rate", "seed", "shuffle", "allow_short"}},
      {"customize", {"epochs", "batch_size", "learning_rate", "seed", "shuffle", "allow_short", "trainable_layers"}},
      {"sweep", {"layers"}},
      {"labeler", {"backend", "endpoint", "model", "token_env", "timeout", "retries", "in_flight", "noise", "seed"}},
      {"wordcloud", {"top_k", "seed", "width", "height", "min_font", "max_font"}},
  };
  return keys;
}

std::string where(const std::filesystem::path& file, const std::string& key) {
  return fmt::format("{}: [{}]", file.string(), key);
}

template <typename T>
T parse_number(const std::string& text, const std::string& context) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) throw ConfigError(fmt::format("{}: '{}' is not a valid number", context, text));
  return value;
}

bool parse_bool(const std::string& text, const std::string& context) {
  if (text == "true" || text == "yes" || text == "on" || text == "1") return true;
  if (text == "false" || text == "no" || text == "off" || text == "0") return false;
  throw ConfigError(fmt::format("{}: '{}' is not a boolean", context, text));
}

}  // namespace

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string::npos) comma = text.size();
    std::string item = text.substr(start, comma - start);
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw ConfigError(fmt::format("empty entry in list '{}'", text));
    out.push_back(parse_number<int>(item.substr(b, e - b + 1), "list"));
    start = comma + 1;
  }
  return out;
}

RunConfig RunConfig::defaults() {
  RunConfig c;
  const ExperimentConfig& e = builtin_experiment_config();
  c.model = e.model;
  c.vocab_min_freq = e.vocab_min_freq;
  c.vocab_max_size = e.vocab_max_size;
  c.pretrain = e.pretrain;
  c.customize = e.customize;
  c.sweep_layers = e.sweep_layers;
  c.synth_seed = builtin_synth_spec().seed;
  c.labeler.seed = builtin_synth_spec().seed;
  return c;
}

void RunConfig::load_ini(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError(fmt::format("config file '{}' does not exist", path.string()));
  pt::ptree tree;
  try {
    pt::read_ini(path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("config file '{}': {}", path.string(), e.what()));
  }
  const auto base_dir = path.parent_path();
  for (const auto& [section, body] : tree) {
    auto sec = known_keys().find(section);
    if (sec == known_keys().end() || body.data() != "") {
      throw ConfigError(fmt::format("{}: unknown section or top-level key '{}'", path.string(), section));
    }
    for (const auto& [key, node] : body) {
      if (!sec->second.contains(key)) {
        throw ConfigError(fmt::format("{}: unknown key '{}' in section [{}]", path.string(), key, section));
      }
    }
  }

  auto get = [&](const std::string& key) -> std::optional<std::string> {
    if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(key, '.'))) return *v;
    return std::nullopt;
  };
  auto input_path = [&](const std::string& key, std::optional<std::filesystem::path>& target) {
    if (auto v = get(key)) {
      std::filesystem::path p = *v;
      target = (p.is_relative() && !v->empty()) ? base_dir / p : p;
      if (v->empty()) target.reset();
    }
  };
  auto num = [&]<typename T>(const std::string& key, T& target) {
    if (auto v = get(key)) target = parse_number<T>(*v, where(path, key));
  };
  auto flag = [&](const std::string& key, bool& target) {
    if (auto v = get(key)) target = parse_bool(*v, where(path, key));
  };
  auto train = [&](const std::string& section, TrainConfig& t) {
    num(section + ".epochs", t.epochs);
    num(section + ".batch_size", t.batch_size);
    num(section + ".learning_rate", t.learning_rate);
    num(section + ".seed", t.seed);
    flag(section + ".shuffle", t.shuffle);
    flag(section + ".allow_short", t.allow_short);
  };

  if (auto v = get("paths.out_dir")) out_dir = *v;
  input_path("paths.stopwords", stopwords);
  input_path("paths.stemmer_rules", stemmer_rules);
  input_path("paths.synth_spec", synth_spec);
  input_path("paths.lexicon", lexicon);
  flag("preprocess.keep_emoji", keep_emoji);

  if (synth_spec) {
    // A different spec brings its own experiment defaults and seed.
    std::ifstream in(*synth_spec, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot read synth spec '{}'", synth_spec->string()));
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const ExperimentConfig e = parse_experiment_config(text);
    model = e.model;
    vocab_min_freq = e.vocab_min_freq;
    vocab_max_size = e.vocab_max_size;
    pretrain = e.pretrain;
    customize = e.customize;
    sweep_layers = e.sweep_layers;
    synth_seed = parse_synth_spec(text).seed;
  }
  num("synth.seed", synth_seed);
  {
    SynthSizes s = synth_sizes.value_or(spec().sizes);
    bool any = false;
    for (auto [key, field] : {std::pair{"synth.generic_train", &s.generic_train}, {"synth.generic_test", &s.generic_test},
                              {"synth.domain_train", &s.domain_train}, {"synth.domain_pool", &s.domain_pool},
                              {"synth.domain_test_per_class", &s.domain_test_per_class}}) {
      if (get(key)) {
        num(key, *field);
        any = true;
      }
    }
    if (any) synth_sizes = s;
  }

  num("model.max_len", model.max_len);
  num("model.d_model", model.d_model);
  num("model.n_heads", model.n_heads);
  num("model.n_layers", model.n_layers);
  num("model.d_ff", model.d_ff);
  num("model.dropout_rate", model.dropout_rate);
  num("model.seed", model.seed);
  num("vocab.min_freq", vocab_min_freq);
  num("vocab.max_size", vocab_max_size);
  train("pretrain", pretrain);
  train("customize", customize);
  num("customize.trainable_layers", customize.trainable_layers);
  if (auto v = get("sweep.layers")) sweep_layers = parse_int_list(*v);

  if (auto v = get("labeler.backend")) labeler.backend = *v;
  if (auto v = get("labeler.endpoint")) labeler.http.endpoint = *v;
  if (auto v = get("labeler.model")) labeler.http.model = *v;
  if (auto v = get("labeler.token_env")) labeler.http.token_env = *v;
  num("labeler.timeout", labeler.http.timeout_seconds);
  num("labeler.retries", labeler.policy.max_attempts);
  num("labeler.in_flight", labeler.policy.max_in_flight);
  if (auto v = get("labeler.noise")) labeler.mock_noise = parse_number<double>(*v, where(path, "labeler.noise"));
  num("labeler.seed", labeler.seed);

  num("wordcloud.top_k", top_k);
  num("wordcloud.seed", cloud_seed);
  num("wordcloud.width", cloud.width);
  num("wordcloud.height", cloud.height);
  num("wordcloud.min_font", cloud.min_font);
  num("wordcloud.max_font", cloud.max_font);
}

void RunConfig::validate() const {
  for (const auto* p : {&stopwords, &stemmer_rules, &synth_spec, &lexicon}) {
    if (*p && !std::filesystem::exists(**p)) throw IoError(fmt::format("file '{}' does not exist", (*p)->string()));
  }
  ModelConfig m = model;
  if (m.vocab_size == 0) m.vocab_size = 4;  // filled in from the vocabulary later
  m.validate();
  if (vocab_min_freq < 1) throw ConfigError("vocab.min_freq must be at least 1");
  if (vocab_max_size < 4) throw ConfigError("vocab.max_size must be at least 4");
  pretrain.validate();
  customize.validate();
  if (labeler.backend != "mock" && labeler.backend != "http") {
    throw ConfigError(fmt::format("labeler.backend must be mock or http (got '{}')", labeler.backend));
  }
  if (labeler.backend == "http" && labeler.http.endpoint.empty()) {
    throw ConfigError("labeler.endpoint is required for the http backend");
  }
  if (labeler.policy.max_attempts < 1) throw ConfigError("labeler.retries must be at least 1");
  if (labeler.policy.max_in_flight < 1) throw ConfigError("labeler.in_flight must be at least 1");
  if (top_k < 1) throw ConfigError("wordcloud.top_k must be at least 1");
}

TextPipeline RunConfig::pipeline() const {
  return TextPipeline(stopwords ? StopwordSet::from_file(*stopwords) : StopwordSet::builtin(),
                      stemmer_rules ? Stemmer::from_file(*stemmer_rules) : Stemmer::builtin(),
                      text::CleanOptions{keep_emoji});
}

SynthSpec RunConfig::spec() const {
  SynthSpec s = synth_spec ? load_synth_spec(*synth_spec) : builtin_synth_spec();
  if (synth_sizes) s.sizes = *synth_sizes;
  return s;
}

MockBackendOptions RunConfig::mock_options() const {
  const SynthSpec s = spec();
  MockBackendOptions o = mock_backend_options(s, labeler.seed);
  if (lexicon) o.lexicon = load_lexicon(*lexicon);
  if (labeler.mock_noise) o.noise_rate = *labeler.mock_noise;
  return o;
}

nlohmann::ordered_json RunConfig::to_json() const {
  using J = nlohmann::ordered_json;
  auto opt_path = [](const std::optional<std::filesystem::path>& p) { return p ? J(p->generic_string()) : J(nullptr); };
  J j;
  j["paths"] = {{"out_dir", out_dir.generic_string()},
                {"stopwords", opt_path(stopwords)},
                {"stemmer_rules", opt_path(stemmer_rules)},
                {"synth_spec", opt_path(synth_spec)},
                {"lexicon", opt_path(lexicon)}};
  j["preprocess"] = {{"keep_emoji", keep_emoji}};
  const SynthSizes s = synth_sizes.value_or(spec().sizes);
  j["synth"] = {{"seed", synth_seed},
                {"generic_train", s.generic_train},
                {"generic_test", s.generic_test},
                {"domain_train", s.domain_train},
                {"domain_pool", s.domain_pool},
                {"domain_test_per_class", s.domain_test_per_class}};
  j["model"] = {{"max_len", model.max_len}, {"d_model", model.d_model},   {"n_heads", model.n_heads},
                {"n_layers", model.n_layers}, {"d_ff", model.d_ff},       {"dropout_rate", model.dropout_rate},
                {"seed", model.seed}};
  j["vocab"] = {{"min_freq", vocab_min_freq}, {"max_size", vocab_max_size}};
  j["pretrain"] = alrn::to_json(pretrain);
  j["customize"] = alrn::to_json(customize);
  j["sweep"] = {{"layers", sweep_layers}};
  j["labeler"] = {{"backend", labeler.backend},
                  {"endpoint", labeler.http.endpoint},
                  {"model", labeler.http.model},
                  {"token_env", labeler.http.token_env},
                  {"timeout", labeler.http.timeout_seconds},
                  {"retries", labeler.policy.max_attempts},
                  {"in_flight", labeler.policy.max_in_flight},
                  {"noise", labeler.mock_noise ? J(*labeler.mock_noise) : J(nullptr)},
                  {"seed", labeler.seed}};
  j["wordcloud"] = {{"top_k", top_k},         {"seed", cloud_seed},         {"width", cloud.width},
                    {"height", cloud.height}, {"min_font", cloud.min_font}, {"max_font", cloud.max_font}};
  return j;
}

}  // namespace alrn::cli
