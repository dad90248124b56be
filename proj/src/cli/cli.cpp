#include "terragan/cli/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <ostream>

#include "context.hpp"
#include "terragan/core/errors.hpp"
#include "terragan/gan/checkpoint.hpp"

namespace terragan::cli {

using nlohmann::json;

namespace {

struct CommandSpec {
  std::string name;
  std::string description;
  json defaults;
};

const std::vector<CommandSpec>& specs() {
  static const std::vector<CommandSpec> all = [] {
    const json adam = {{"lr", 2e-4}, {"beta1", 0.5}, {"beta2", 0.999}};
    std::vector<CommandSpec> v;
    v.push_back({"build-dataset", "Tile DEM rasters, fetch paired RGB imagery and write a dataset file",
                 {{"rasters", json::array()},
                  {"raster_format", "auto"},
                  {"client", "mock_fs"},
                  {"fixture_dir", ""},
                  {"http_endpoint", ""},
                  {"tile_size", 256},
                  {"max_attempts", 3}}});
    v.push_back({"stats", "Global elevation min/max and tile count over DEM rasters",
                 {{"rasters", json::array()}, {"raster_format", "auto"}, {"tile_size", 256}}});
    json progan = {{"dataset", ""},
                   {"channels", "rgb"},
                   {"resolution", 16},
                   {"iterations_per_stage", 500},
                   {"fade_fraction", 0.5},
                   {"batch_size", 8},
                   {"d_steps_per_g_step", 1},
                   {"latent_dim", 64},
                   {"channel_base", 32},
                   {"channel_floor", 8},
                   {"generator_loss", "non_saturating"},
                   {"sample_every", 0},
                   {"sample_count", 8}};
    progan.update(adam);
    v.push_back({"train-progan", "Progressively grow and train an unconditional image GAN", progan});
    json p2p = {{"dataset", ""},
                {"direction", "rgb-to-dem"},
                {"resolution", 32},
                {"iterations", 1000},
                {"batch_size", 8},
                {"unet_depth", 3},
                {"unet_base_channels", 16},
                {"patch_depth", 3},
                {"patch_base_channels", 16},
                {"l1_weight", 100.0},
                {"generator_loss", "non_saturating"},
                {"checkpoint_every", 0},
                {"holdout", 0}};
    p2p.update(adam);
    v.push_back({"train-pix2pix", "Train a conditional translation model between RGB and DEM tiles", p2p});
    v.push_back({"generate", "Sample an RGB tile, translate it to a DEM and write the pair and its mesh",
                 {{"progan_checkpoint", ""},
                  {"pix2pix_checkpoint", ""},
                  {"resolution", 16},
                  {"latent_dim", 64},
                  {"channel_base", 32},
                  {"channel_floor", 8},
                  {"dem_min", 0.0},
                  {"dem_max", 1000.0},
                  {"origin_lon", 0.0},
                  {"origin_lat", 0.0},
                  {"cellsize", 0.001},
                  {"vertical_scale", 0.25}}});
    v.push_back({"perlin", "Sample a Perlin-noise DEM, optionally colorized by an inverse translation model",
                 {{"size", 32},
                  {"base_frequency", 4.0},
                  {"octaves", 1},
                  {"persistence", 0.5},
                  {"lacunarity", 2.0},
                  {"colorize", false},
                  {"inverse_checkpoint", ""},
                  {"dem_min", 0.0},
                  {"dem_max", 1000.0},
                  {"vertical_scale", 0.25},
                  {"mesh_format", "ply"}}});
    v.push_back({"interpolate", "Render a linear latent sweep between two random codes",
                 {{"progan_checkpoint", ""},
                  {"steps", 8},
                  {"resolution", 16},
                  {"latent_dim", 64},
                  {"channel_base", 32},
                  {"channel_floor", 8}}});
    v.push_back({"export-mesh", "Convert a dataset pair into a colored triangle mesh",
                 {{"dataset", ""}, {"pair_index", 0}, {"format", "ply"}, {"vertical_scale", 0.25}}});
    v.push_back({"grad-check", "Finite-difference verification of every differentiable operation",
                 {{"instances", 50}}});
    v.push_back({"make-fixture-roi", "Write the synthetic 512x512 ROI raster and its mock imagery fixtures",
                 {{"size", 512}, {"tile_size", 256}, {"origin_lon", 20.0}, {"origin_lat", 40.0}, {"cellsize", 0.001}}});
    for (auto& s : v) {
      s.defaults["seed"] = 0;
      s.defaults["out"] = "out/" + s.name;
    }
    return v;
  }();
  return all;
}

enum class KeyType { integer, real, text, boolean, text_list };

KeyType key_type(const json& value) {
  if (value.is_boolean()) return KeyType::boolean;
  if (value.is_number_integer()) return KeyType::integer;
  if (value.is_number()) return KeyType::real;
  if (value.is_string()) return KeyType::text;
  return KeyType::text_list;
}

std::string flag_name(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

json convert_flag(const std::string& key, KeyType type, const std::string& text) {
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  switch (type) {
    case KeyType::integer: {
      if (key == "seed") {
        std::uint64_t v = 0;
        const auto [p, ec] = std::from_chars(first, last, v);
        if (ec == std::errc() && p == last) return v;
      } else {
        std::int64_t v = 0;
        const auto [p, ec] = std::from_chars(first, last, v);
        if (ec == std::errc() && p == last) return v;
      }
      throw ConfigError(flag_name(key) + " expects an integer, got '" + text + "'");
    }
    case KeyType::real: {
      double v = 0;
      const auto [p, ec] = std::from_chars(first, last, v);
      if (ec == std::errc() && p == last) return v;
      throw ConfigError(flag_name(key) + " expects a number, got '" + text + "'");
    }
    default:
      return text;
  }
}

json read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path + " is not valid JSON: " + e.what());
  }
}

void emit_error(std::ostream& err, const std::string& kind, const std::string& message, int code) {
  err << json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << "\n";
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& s : specs()) n.push_back(s.name);
    return n;
  }();
  return names;
}

json default_config(std::string_view subcommand) {
  for (const auto& s : specs()) {
    if (s.name == subcommand) return s.defaults;
  }
  throw ConfigError("unknown subcommand " + std::string(subcommand));
}

json merge_strict(const json& base, const json& overrides, const std::string& source) {
  if (!overrides.is_object()) throw ConfigError(source + ": configuration must be a JSON object");
  json merged = base;
  for (const auto& [key, value] : overrides.items()) {
    if (!base.contains(key)) throw ConfigError(source + ": unknown key '" + key + "'");
    bool ok = false;
    switch (key_type(base[key])) {
      case KeyType::boolean: ok = value.is_boolean(); break;
      case KeyType::integer:
        ok = value.is_number_integer() && (key != "seed" || value.is_number_unsigned() || value.get<std::int64_t>() >= 0);
        break;
      case KeyType::real: ok = value.is_number(); break;
      case KeyType::text: ok = value.is_string(); break;
      case KeyType::text_list:
        ok = value.is_array() && std::all_of(value.begin(), value.end(), [](const json& e) { return e.is_string(); });
        break;
    }
    if (!ok) {
      static const char* const expected[] = {"an unsigned integer", "a number", "a string", "a boolean",
                                             "an array of strings"};
      const auto type = key_type(base[key]);
      throw ConfigError(source + ": key '" + key + "' expects " +
                        (type == KeyType::integer && key != "seed" ? std::string("an integer")
                                                                   : std::string(expected[static_cast<int>(type)])) +
                        ", got " +
                        value.dump());
    }
    merged[key] = key_type(base[key]) == KeyType::real ? json(value.get<double>()) : value;
  }
  return merged;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Terrain synthesis with progressive and conditional GANs", "terragan"};
  app.require_subcommand(1);
  std::string config_path;
  std::string seed_text;
  std::string out_dir;
  app.add_option("--config", config_path, "Strict JSON config for the subcommand")->type_name("FILE");
  app.add_option("--seed", seed_text, "Root seed (u64)")->type_name("UINT");
  app.add_option("--out", out_dir, "Output directory")->type_name("DIR");

  struct Overrides {
    std::map<std::string, std::string> text;
    std::map<std::string, std::vector<std::string>> lists;
    std::map<std::string, bool> flags;
    std::map<std::string, CLI::Option*> options;
  };
  std::map<std::string, Overrides> overrides;
  std::map<std::string, CLI::App*> apps;
  for (const auto& spec : specs()) {
    auto* sub = app.add_subcommand(spec.name, spec.description);
    sub->fallthrough();
    apps[spec.name] = sub;
    auto& o = overrides[spec.name];
    for (const auto& [key, value] : spec.defaults.items()) {
      if (key == "seed" || key == "out") continue;
      const auto flag = flag_name(key);
      const auto help = "Config key " + key + " (default " + value.dump() + ")";
      switch (key_type(value)) {
        case KeyType::boolean: o.options[key] = sub->add_flag(flag, o.flags[key], help); break;
        case KeyType::text_list: o.options[key] = sub->add_option(flag, o.lists[key], help); break;
        default: o.options[key] = sub->add_option(flag, o.text[key], help); break;
      }
      static const char* const type_names[] = {"INT", "FLOAT", "TEXT", "", "PATH..."};
      o.options[key]->type_name(type_names[static_cast<int>(key_type(value))]);
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    emit_error(err, "UsageError", e.what(), kExitUsage);
    const auto parsed = app.get_subcommands();
    err << (parsed.empty() ? app.help() : parsed.front()->help());
    return kExitUsage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  json config;
  try {
    config = default_config(command);
    if (!config_path.empty()) config = merge_strict(config, read_config_file(config_path), config_path);
    if (!seed_text.empty()) config["seed"] = convert_flag("seed", KeyType::integer, seed_text);
    if (!out_dir.empty()) config["out"] = out_dir;
    auto& o = overrides[command];
    for (const auto& [key, option] : o.options) {
      if (option->count() == 0) continue;
      const auto type = key_type(config[key]);
      if (type == KeyType::boolean) {
        config[key] = o.flags[key];
      } else if (type == KeyType::text_list) {
        config[key] = o.lists[key];
      } else {
        config[key] = convert_flag(key, type, o.text[key]);
      }
    }
  } catch (const ConfigError& e) {
    emit_error(err, "ConfigError", e.what(), kExitUsage);
    return kExitUsage;
  }

  const auto start = std::chrono::steady_clock::now();
  auto fn = detail::find_command(command);
  try {
    detail::RunContext ctx(command, config, out);
    const int code = fn(ctx);
    ctx.write_report(code, detail::RunContext::seconds_since(start));
    return code;
  } catch (const ConfigError& e) {
    emit_error(err, "ConfigError", e.what(), kExitUsage);
    return kExitUsage;
  } catch (const ContractError& e) {
    emit_error(err, "ContractError", e.what(), kExitContract);
    return kExitContract;
  } catch (const ShapeError& e) {
    emit_error(err, "ShapeError", e.what(), kExitContract);
    return kExitContract;
  } catch (const StateError& e) {
    emit_error(err, "StateError", e.what(), kExitContract);
    return kExitContract;
  } catch (const ParseError& e) {
    emit_error(err, "ParseError", e.what(), kExitData);
  } catch (const CorruptionError& e) {
    emit_error(err, "CorruptionError", e.what(), kExitData);
  } catch (const IoError& e) {
    emit_error(err, "IoError", e.what(), kExitData);
  } catch (const EmptyDataError& e) {
    emit_error(err, "EmptyDataError", e.what(), kExitData);
  } catch (const MissingFixtureError& e) {
    emit_error(err, "MissingFixtureError", e.what(), kExitData);
  } catch (const FetchError& e) {
    emit_error(err, "FetchError", e.what(), kExitData);
  } catch (const std::exception& e) {
    emit_error(err, "Error", e.what(), kExitData);
  }
  return kExitData;
}

}  // namespace terragan::cli
