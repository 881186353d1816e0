#pragma once

#include "motok/toy_vae.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace motok::config {

using KeyValues = std::map<std::string, std::string>;

/// Flat `key = value` text. Blank lines and lines starting with '#' are skipped; a
/// repeated key or a line without '=' is an error.
KeyValues parse_key_values(std::string_view text, std::string_view source = "config");
KeyValues load_key_values(const std::filesystem::path& path);

/// Sets one ToyVaeConfig field by name. Throws InvalidArgument for an unknown key or an
/// unparsable value.
void apply_vae_setting(vae::ToyVaeConfig& config, const std::string& key,
                       const std::string& value);

/// Applies every entry, then validates.
vae::ToyVaeConfig vae_config_from(const KeyValues& values, vae::ToyVaeConfig base = {});

/// Round-trips through parse_key_values and vae_config_from.
std::string format_vae_config(const vae::ToyVaeConfig& config);

}  // namespace motok::config
