#include "west/config.hpp"

#include <charconv>
#include <set>
#include <stdexcept>
#include <string>

namespace west {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad_value(std::string_view key) {
  throw std::runtime_error("invalid value for config key: " + std::string(key));
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) bad_value(key);
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_value(key);
}

template <typename Enum, typename FromName>
Enum parse_enum(std::string_view key, std::string_view value, FromName from_name) {
  try {
    return from_name(value);
  } catch (const std::runtime_error&) {
    bad_value(key);
  }
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

const char* format_bool(bool v) { return v ? "true" : "false"; }

// Returns false when the key is unknown. Shared by both factor blocks.
bool apply_factor_key(FactorConfig& fc, std::string_view suffix, std::string_view key,
                      std::string_view value) {
  if (suffix == "coding")
    fc.coding = parse_enum<CodingKind>(key, value, coding_kind_from_name);
  else if (suffix == "k")
    fc.k = parse_number<int>(key, value);
  else if (suffix == "n")
    fc.n = parse_number<int>(key, value);
  else if (suffix == "t")
    fc.t = parse_number<int>(key, value);
  else if (suffix == "structure")
    fc.structure = parse_enum<DenseStructure>(key, value, dense_structure_from_name);
  else if (suffix == "tied")
    fc.tied = parse_bool(key, value);
  else if (suffix == "weighted")
    fc.weighted = parse_bool(key, value);
  else
    return false;
  return true;
}

bool apply_key(RunConfig& rc, std::string_view key, std::string_view value) {
  ModelConfig& m = rc.model;
  Hyperparameters& hp = rc.hp;
  if (key == "train")
    rc.train_path = std::string(value);
  else if (key == "valid")
    rc.valid_path = std::string(value);
  else if (key == "test")
    rc.test_path = std::string(value);
  else if (key == "vocab_file")
    rc.vocab_path = std::string(value);
  else if (key == "out_dir")
    rc.out_dir = std::string(value);
  else if (key == "vocab_size")
    m.vocab_size = parse_number<int>(key, value);
  else if (key == "emb_dim")
    m.emb_dim = parse_number<int>(key, value);
  else if (key == "hidden")
    m.hidden = parse_number<int>(key, value);
  else if (key == "layers")
    m.layers = parse_number<int>(key, value);
  else if (key == "projection")
    m.projection = parse_number<int>(key, value);
  else if (key == "init_range")
    m.init_range = parse_number<double>(key, value);
  else if (key == "seed")
    m.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "emb_mode")
    m.emb_mode = parse_enum<EmbeddingMode>(key, value, embedding_mode_from_name);
  else if (key == "head_mode")
    m.head_mode = parse_enum<HeadMode>(key, value, head_mode_from_name);
  else if (key == "soft_bias")
    m.soft_bias = parse_bool(key, value);
  else if (key.starts_with("emb_") && apply_factor_key(m.emb, key.substr(4), key, value))
    ;
  else if (key.starts_with("soft_") && apply_factor_key(m.soft, key.substr(5), key, value))
    ;
  else if (key == "lr")
    hp.lr = parse_number<double>(key, value);
  else if (key == "lr_decay")
    hp.lr_decay = parse_number<double>(key, value);
  else if (key == "decay_start")
    hp.decay_start = parse_number<int>(key, value);
  else if (key == "epochs")
    hp.epochs = parse_number<int>(key, value);
  else if (key == "batch_size")
    hp.batch_size = parse_number<int>(key, value);
  else if (key == "bptt")
    hp.bptt = parse_number<int>(key, value);
  else if (key == "clip")
    hp.clip = parse_number<double>(key, value);
  else if (key == "lambda_lr_mult")
    hp.lambda_lr_mult = parse_number<double>(key, value);
  else
    return false;
  return true;
}

void append_factor(std::string& out, const char* prefix, const FactorConfig& fc) {
  out += std::string(prefix) + "_coding = " + coding_kind_name(fc.coding) + '\n';
  out += std::string(prefix) + "_k = " + std::to_string(fc.k) + '\n';
  out += std::string(prefix) + "_n = " + std::to_string(fc.n) + '\n';
  out += std::string(prefix) + "_t = " + std::to_string(fc.t) + '\n';
  out += std::string(prefix) + "_structure = " + dense_structure_name(fc.structure) + '\n';
  out += std::string(prefix) + "_tied = " + std::string(format_bool(fc.tied)) + '\n';
  out += std::string(prefix) + "_weighted = " + std::string(format_bool(fc.weighted)) + '\n';
}

} // namespace

bool RunConfig::operator==(const RunConfig& o) const {
  return serialize_config(*this) == serialize_config(o);
}

RunConfig parse_config(std::string_view text) {
  RunConfig rc;
  std::set<std::string, std::less<>> seen;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    std::string_view line =
        end == std::string_view::npos ? text.substr(pos) : text.substr(pos, end - pos);
    pos = end == std::string_view::npos ? text.size() : end + 1;

    if (std::size_t hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    std::size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      throw std::runtime_error("malformed config line: " + std::string(line));
    std::string key(trim(line.substr(0, eq)));
    std::string_view value = trim(line.substr(eq + 1));

    if (seen.count(key)) throw std::runtime_error("duplicate config key: " + key);
    if (!apply_key(rc, key, value)) throw std::runtime_error("unknown config key: " + key);
    seen.insert(key);
  }
  return rc;
}

std::string serialize_config(const RunConfig& rc) {
  const ModelConfig& m = rc.model;
  const Hyperparameters& hp = rc.hp;
  std::string out;
  out += "train = " + rc.train_path + '\n';
  out += "valid = " + rc.valid_path + '\n';
  out += "test = " + rc.test_path + '\n';
  out += "vocab_file = " + rc.vocab_path + '\n';
  out += "out_dir = " + rc.out_dir + '\n';
  out += "vocab_size = " + std::to_string(m.vocab_size) + '\n';
  out += "emb_dim = " + std::to_string(m.emb_dim) + '\n';
  out += "hidden = " + std::to_string(m.hidden) + '\n';
  out += "layers = " + std::to_string(m.layers) + '\n';
  out += "projection = " + std::to_string(m.projection) + '\n';
  out += "init_range = " + format_double(m.init_range) + '\n';
  out += "seed = " + std::to_string(m.seed) + '\n';
  out += "emb_mode = " + std::string(embedding_mode_name(m.emb_mode)) + '\n';
  append_factor(out, "emb", m.emb);
  out += "head_mode = " + std::string(head_mode_name(m.head_mode)) + '\n';
  append_factor(out, "soft", m.soft);
  out += "soft_bias = " + std::string(format_bool(m.soft_bias)) + '\n';
  out += "lr = " + format_double(hp.lr) + '\n';
  out += "lr_decay = " + format_double(hp.lr_decay) + '\n';
  out += "decay_start = " + std::to_string(hp.decay_start) + '\n';
  out += "epochs = " + std::to_string(hp.epochs) + '\n';
  out += "batch_size = " + std::to_string(hp.batch_size) + '\n';
  out += "bptt = " + std::to_string(hp.bptt) + '\n';
  out += "clip = " + format_double(hp.clip) + '\n';
  out += "lambda_lr_mult = " + format_double(hp.lambda_lr_mult) + '\n';
  return out;
}

} // namespace west
