#include "motok/config.hpp"

#include "motok/binary_io.hpp"
#include "motok/error.hpp"

#include <charconv>
#include <functional>
#include <sstream>

namespace motok::config {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* begin = value.data();
  const char* end = begin + value.size();
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc() || ptr != end) {
    throw InvalidArgument("invalid value '" + value + "' for key '" + key + "'");
  }
  return out;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

KeyValues parse_key_values(std::string_view text, std::string_view source) {
  KeyValues out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    const std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (line.empty() || line.front() == '#') {
      continue;
    }
    const auto eq = line.find('=');
    const std::string where = std::string(source) + ":" + std::to_string(line_no);
    if (eq == std::string_view::npos) {
      throw InvalidArgument(where + ": expected key = value");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) {
      throw InvalidArgument(where + ": empty key");
    }
    if (!out.emplace(key, value).second) {
      throw InvalidArgument(where + ": duplicate key '" + key + "'");
    }
  }
  return out;
}

KeyValues load_key_values(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  return parse_key_values(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()),
                          path.string());
}

void apply_vae_setting(vae::ToyVaeConfig& c, const std::string& key, const std::string& value) {
  using Setter = std::function<void(vae::ToyVaeConfig&, const std::string&)>;
  static const std::map<std::string, Setter> setters = {
      {"vocab_size", [](auto& c, const auto& v) { c.vocab_size = parse_number<std::uint32_t>("vocab_size", v); }},
      {"hidden_width", [](auto& c, const auto& v) { c.hidden_width = parse_number<int>("hidden_width", v); }},
      {"downsample_layers", [](auto& c, const auto& v) { c.downsample_layers = parse_number<int>("downsample_layers", v); }},
      {"lambda_recon", [](auto& c, const auto& v) { c.lambda_recon = parse_number<double>("lambda_recon", v); }},
      {"lambda_commit", [](auto& c, const auto& v) { c.lambda_commit = parse_number<double>("lambda_commit", v); }},
      {"lambda_entropy", [](auto& c, const auto& v) { c.lambda_entropy = parse_number<double>("lambda_entropy", v); }},
      {"entropy_temperature", [](auto& c, const auto& v) { c.entropy_temperature = parse_number<double>("entropy_temperature", v); }},
      {"learning_rate", [](auto& c, const auto& v) { c.learning_rate = parse_number<double>("learning_rate", v); }},
      {"seed", [](auto& c, const auto& v) { c.seed = parse_number<std::uint64_t>("seed", v); }},
      {"epochs", [](auto& c, const auto& v) { c.epochs = parse_number<int>("epochs", v); }},
      {"batch_size", [](auto& c, const auto& v) { c.batch_size = parse_number<int>("batch_size", v); }},
  };
  const auto it = setters.find(key);
  if (it == setters.end()) {
    throw InvalidArgument("unknown config key '" + key + "'");
  }
  it->second(c, value);
}

vae::ToyVaeConfig vae_config_from(const KeyValues& values, vae::ToyVaeConfig base) {
  for (const auto& [key, value] : values) {
    apply_vae_setting(base, key, value);
  }
  base.validate();
  return base;
}

std::string format_vae_config(const vae::ToyVaeConfig& c) {
  std::ostringstream os;
  os << "vocab_size = " << c.vocab_size << '\n'
     << "hidden_width = " << c.hidden_width << '\n'
     << "downsample_layers = " << c.downsample_layers << '\n'
     << "lambda_recon = " << format_double(c.lambda_recon) << '\n'
     << "lambda_commit = " << format_double(c.lambda_commit) << '\n'
     << "lambda_entropy = " << format_double(c.lambda_entropy) << '\n'
     << "entropy_temperature = " << format_double(c.entropy_temperature) << '\n'
     << "learning_rate = " << format_double(c.learning_rate) << '\n'
     << "seed = " << c.seed << '\n'
     << "epochs = " << c.epochs << '\n'
     << "batch_size = " << c.batch_size << '\n';
  return os.str();
}

}  // namespace motok::config
