#include "carbon/caseio.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "carbon/errors.hpp"
#include "carbon/validate.hpp"

namespace carbon {

using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

double require_number(const json& obj, const char* field, const std::string& where) {
  auto it = obj.find(field);
  if (it == obj.end())
    throw ParseError("missing field '" + std::string(field) + "'", where);
  if (!it->is_number())
    throw ParseError("field '" + std::string(field) + "' must be a number", where);
  return it->get<double>();
}

std::string require_string(const json& obj, const char* field,
                           const std::string& where) {
  auto it = obj.find(field);
  if (it == obj.end())
    throw ParseError("missing field '" + std::string(field) + "'", where);
  if (!it->is_string())
    throw ParseError("field '" + std::string(field) + "' must be a string", where);
  return it->get<std::string>();
}

const json& require_array(const json& doc, const char* field) {
  auto it = doc.find(field);
  if (it == doc.end())
    throw ParseError("missing section '" + std::string(field) + "'", field);
  if (!it->is_array())
    throw ParseError("section '" + std::string(field) + "' must be an array", field);
  return *it;
}

}  // namespace

SystemCase parse_case_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid document: ") + e.what(),
                     "byte " + std::to_string(e.byte));
  }
  if (!doc.is_object()) throw ParseError("top level must be an object", "document");

  SystemCase sys;
  sys.name = doc.value("name", "");

  int i = 0;
  for (const auto& b : require_array(doc, "buses")) {
    std::string where = "buses[" + std::to_string(i++) + "]";
    Bus bus;
    bus.id = require_string(b, "id", where);
    bus.is_reference = b.value("reference", false);
    sys.buses.push_back(std::move(bus));
  }
  i = 0;
  for (const auto& l : require_array(doc, "lines")) {
    std::string where = "lines[" + std::to_string(i++) + "]";
    Line line;
    line.from_bus = require_string(l, "from", where);
    line.to_bus = require_string(l, "to", where);
    line.susceptance = require_number(l, "susceptance", where);
    if (l.contains("limit") && !l["limit"].is_null())
      line.limit = require_number(l, "limit", where);
    sys.lines.push_back(std::move(line));
  }
  i = 0;
  for (const auto& g : require_array(doc, "generators")) {
    std::string where = "generators[" + std::to_string(i++) + "]";
    Generator gen;
    gen.id = require_string(g, "id", where);
    gen.bus = require_string(g, "bus", where);
    gen.cost = require_number(g, "cost", where);
    gen.emission = require_number(g, "emission", where);
    gen.p_min = require_number(g, "pmin", where);
    gen.p_max = require_number(g, "pmax", where);
    sys.generators.push_back(std::move(gen));
  }
  i = 0;
  for (const auto& d : require_array(doc, "consumers")) {
    std::string where = "consumers[" + std::to_string(i++) + "]";
    Consumer con;
    con.id = require_string(d, "id", where);
    con.bus = require_string(d, "bus", where);
    con.utility = require_number(d, "utility", where);
    con.carbon_cost = require_number(d, "carbon_cost", where);
    con.p_min = require_number(d, "pmin", where);
    con.p_max = require_number(d, "pmax", where);
    sys.consumers.push_back(std::move(con));
  }

  require_valid(sys);
  return sys;
}

SystemCase parse_case(const std::string& path) {
  return parse_case_text(read_file(path));
}

std::string serialize_case(const SystemCase& sys) {
  json doc;
  doc["name"] = sys.name;
  doc["buses"] = json::array();
  for (const auto& b : sys.buses) {
    json o{{"id", b.id}};
    if (b.is_reference) o["reference"] = true;
    doc["buses"].push_back(std::move(o));
  }
  doc["lines"] = json::array();
  for (const auto& l : sys.lines) {
    json o{{"from", l.from_bus}, {"to", l.to_bus}, {"susceptance", l.susceptance}};
    if (l.limit) o["limit"] = *l.limit;
    doc["lines"].push_back(std::move(o));
  }
  doc["generators"] = json::array();
  for (const auto& g : sys.generators)
    doc["generators"].push_back({{"id", g.id},
                                 {"bus", g.bus},
                                 {"cost", g.cost},
                                 {"emission", g.emission},
                                 {"pmin", g.p_min},
                                 {"pmax", g.p_max}});
  doc["consumers"] = json::array();
  for (const auto& d : sys.consumers)
    doc["consumers"].push_back({{"id", d.id},
                                {"bus", d.bus},
                                {"utility", d.utility},
                                {"carbon_cost", d.carbon_cost},
                                {"pmin", d.p_min},
                                {"pmax", d.p_max}});
  return doc.dump(2) + "\n";
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::string file;

  int column(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }
};

CsvTable read_csv(const std::string& path,
                  const std::vector<std::string>& required) {
  if (!std::filesystem::exists(path))
    throw IoError("missing file '" + path + "'");
  std::ifstream in(path);
  CsvTable t;
  t.file = path;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    auto fields = split_csv_line(line);
    if (first) {
      t.header = fields;
      first = false;
    } else {
      t.rows.push_back(fields);
    }
  }
  for (const auto& name : required)
    if (t.column(name) < 0)
      throw ParseError("header mismatch: expected column '" + name + "'", path);
  return t;
}

double parse_number(const CsvTable& t, size_t row, int col) {
  const std::string& s = t.rows[row][col];
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ParseError("bad number '" + s + "'",
                     t.file + ":row " + std::to_string(row + 2) + ":col " +
                         std::to_string(col + 1));
  }
}

std::string cell(const CsvTable& t, size_t row, int col) {
  if (col >= static_cast<int>(t.rows[row].size())) return "";
  return t.rows[row][col];
}

bool parse_bool(const std::string& s) {
  return s == "1" || s == "true" || s == "yes";
}

}  // namespace

SystemCase parse_case_csv(const std::string& dir) {
  namespace fs = std::filesystem;
  SystemCase sys;
  sys.name = fs::path(dir).filename().string();

  CsvTable buses = read_csv((fs::path(dir) / "buses.csv").string(), {"id"});
  int ref_col = buses.column("reference");
  for (size_t r = 0; r < buses.rows.size(); ++r) {
    Bus b;
    b.id = cell(buses, r, buses.column("id"));
    b.is_reference = ref_col >= 0 && parse_bool(cell(buses, r, ref_col));
    sys.buses.push_back(std::move(b));
  }

  CsvTable lines = read_csv((fs::path(dir) / "lines.csv").string(),
                            {"from", "to", "susceptance"});
  int limit_col = lines.column("limit");
  for (size_t r = 0; r < lines.rows.size(); ++r) {
    Line l;
    l.from_bus = cell(lines, r, lines.column("from"));
    l.to_bus = cell(lines, r, lines.column("to"));
    l.susceptance = parse_number(lines, r, lines.column("susceptance"));
    if (limit_col >= 0 && !cell(lines, r, limit_col).empty())
      l.limit = parse_number(lines, r, limit_col);
    sys.lines.push_back(std::move(l));
  }

  CsvTable gens = read_csv((fs::path(dir) / "generators.csv").string(),
                           {"id", "bus", "cost", "emission", "pmin", "pmax"});
  for (size_t r = 0; r < gens.rows.size(); ++r) {
    Generator g;
    g.id = cell(gens, r, gens.column("id"));
    g.bus = cell(gens, r, gens.column("bus"));
    g.cost = parse_number(gens, r, gens.column("cost"));
    g.emission = parse_number(gens, r, gens.column("emission"));
    g.p_min = parse_number(gens, r, gens.column("pmin"));
    g.p_max = parse_number(gens, r, gens.column("pmax"));
    sys.generators.push_back(std::move(g));
  }

  CsvTable cons = read_csv((fs::path(dir) / "consumers.csv").string(),
                           {"id", "bus", "utility", "carbon_cost", "pmin", "pmax"});
  for (size_t r = 0; r < cons.rows.size(); ++r) {
    Consumer d;
    d.id = cell(cons, r, cons.column("id"));
    d.bus = cell(cons, r, cons.column("bus"));
    d.utility = parse_number(cons, r, cons.column("utility"));
    d.carbon_cost = parse_number(cons, r, cons.column("carbon_cost"));
    d.p_min = parse_number(cons, r, cons.column("pmin"));
    d.p_max = parse_number(cons, r, cons.column("pmax"));
    sys.consumers.push_back(std::move(d));
  }

  require_valid(sys);
  return sys;
}

void write_case_csv(const SystemCase& sys, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  auto open = [&](const char* name) {
    std::ofstream out(fs::path(dir) / name, std::ios::binary);
    if (!out) throw IoError(std::string("cannot write '") + name + "'");
    return out;
  };
  {
    auto out = open("buses.csv");
    out << "id,reference\n";
    for (const auto& b : sys.buses)
      out << b.id << "," << (b.is_reference ? "true" : "false") << "\n";
  }
  {
    auto out = open("lines.csv");
    out << "from,to,susceptance,limit\n";
    char buf[64];
    for (const auto& l : sys.lines) {
      out << l.from_bus << "," << l.to_bus << ",";
      std::snprintf(buf, sizeof buf, "%.12g", l.susceptance);
      out << buf << ",";
      if (l.limit) {
        std::snprintf(buf, sizeof buf, "%.12g", *l.limit);
        out << buf;
      }
      out << "\n";
    }
  }
  {
    auto out = open("generators.csv");
    out << "id,bus,cost,emission,pmin,pmax\n";
    char buf[160];
    for (const auto& g : sys.generators) {
      std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g", g.cost,
                    g.emission, g.p_min, g.p_max);
      out << g.id << "," << g.bus << "," << buf << "\n";
    }
  }
  {
    auto out = open("consumers.csv");
    out << "id,bus,utility,carbon_cost,pmin,pmax\n";
    char buf[160];
    for (const auto& d : sys.consumers) {
      std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g", d.utility,
                    d.carbon_cost, d.p_min, d.p_max);
      out << d.id << "," << d.bus << "," << buf << "\n";
    }
  }
}

SystemCase load_case(const std::string& path) {
  if (std::filesystem::is_directory(path)) return parse_case_csv(path);
  return parse_case(path);
}

}  // namespace carbon
