// Command-line driver: render, export, serve, validate.
//
// Exit codes: 0 success, 1 validation error, 2 I/O error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "strata/error.hpp"
#include "strata/server.hpp"
#include "strata/session.hpp"

namespace {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("cannot read '" + path + "'");
  return ss.str();
}

void write_output(const std::string& path, const std::string& bytes) {
  if (path.empty() || path == "-") {
    std::cout.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    std::cout.flush();
    if (!std::cout) throw IoError("cannot write to standard output");
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw IoError("cannot write '" + path + "'");
}

struct Inputs {
  std::string data;
  std::string descriptor;
  std::string state;
};

strata::Table load_table(const Inputs& in) {
  const std::string csv = read_file(in.data);
  std::optional<std::string> descriptor;
  if (!in.descriptor.empty()) descriptor = read_file(in.descriptor);
  auto dataset = std::make_shared<const strata::Dataset>(
      descriptor ? strata::load_dataset(csv, std::string_view(*descriptor)) : strata::load_dataset(csv));
  strata::Table table(dataset);
  if (!in.state.empty()) strata::restore_document(table, strata::parse_state_document(read_file(in.state)));
  return table;
}

std::string render(const strata::Table& table, const strata::LayoutParams& params) {
  const auto rows = table.traverse();
  const strata::Layout layout = strata::compute_layout(table, rows, params);
  const strata::Scene scene = strata::build_scene(table, rows, layout, strata::RowRange{0, rows.size()});
  return strata::render_svg(scene);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Table visualization engine: headless rendering, export and session service"};
  app.require_subcommand(1);

  Inputs in;
  std::string out_path;
  strata::LayoutParams params;

  auto add_inputs = [&](CLI::App* cmd, bool data_required) {
    auto* data = cmd->add_option("--data", in.data, "CSV file with a header row");
    if (data_required) data->required();
    cmd->add_option("--descriptor", in.descriptor, "column descriptor JSON");
    cmd->add_option("--state", in.state, "state document JSON");
  };
  auto add_layout = [&](CLI::App* cmd) {
    cmd->add_option("--viewport-h", params.viewport_h, "viewport height in px (overview mode)");
    cmd->add_option("--detail-row-h", params.detail_row_h, "item row height in detail mode");
    cmd->add_option("--aggregate-row-h", params.aggregate_row_h, "aggregated group row height");
    cmd->add_option("--header-row-h", params.header_row_h, "group header row height");
    cmd->add_option("--min-item-h", params.min_item_h, "minimum item height in overview mode");
  };

  auto* render_cmd = app.add_subcommand("render", "render the full table to SVG");
  add_inputs(render_cmd, true);
  add_layout(render_cmd);
  render_cmd->add_option("--out", out_path, "output file (default: standard output)");

  auto* export_cmd = app.add_subcommand("export", "export visible rows to CSV");
  add_inputs(export_cmd, true);
  export_cmd->add_option("--out", out_path, "output file (default: standard output)");

  auto* validate_cmd = app.add_subcommand("validate", "check descriptor and state documents");
  add_inputs(validate_cmd, false);

  strata::ServerOptions server_options;
  std::string token;
  auto* serve_cmd = app.add_subcommand("serve", "run the HTTP/WebSocket session service");
  add_layout(serve_cmd);
  serve_cmd->add_option("--port", server_options.port, "listen port")->check(CLI::Range(1, 65535));
  serve_cmd->add_option("--address", server_options.address, "listen address");
  serve_cmd->add_option("--token", token, "require this bearer token on every request");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    params.validate();
    if (render_cmd->parsed()) {
      write_output(out_path, render(load_table(in), params));
    } else if (export_cmd->parsed()) {
      write_output(out_path, strata::export_csv(load_table(in)));
    } else if (validate_cmd->parsed()) {
      if (in.descriptor.empty() && in.state.empty() && in.data.empty()) {
        std::cerr << "validate: nothing to check; pass --descriptor, --state or --data\n";
        return 1;
      }
      if (!in.descriptor.empty()) strata::validate_descriptor(read_file(in.descriptor));
      if (!in.state.empty()) strata::parse_state_document(read_file(in.state));
      // With data present the documents are also checked against it.
      if (!in.data.empty()) load_table(in);
      std::cerr << "valid\n";
    } else if (serve_cmd->parsed()) {
      if (!token.empty()) server_options.bearer_token = token;
      strata::SessionService service(params);
      server_options.handle_signals = true;
      strata::Server server(service, server_options);
      server.listen();
      std::cerr << "listening on " << server_options.address << ":" << server.port() << "\n";
      server.run();
    }
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const strata::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
