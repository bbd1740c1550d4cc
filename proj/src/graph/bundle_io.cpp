#include "gsan/bundle_io.hpp"

#include <string>
#include <vector>

#include "gsan/errors.hpp"
#include "gsan/text.hpp"

namespace gsan {

namespace fs = std::filesystem;
using nlohmann::json;

json parse_json_file(const fs::path& file) {
  const std::string contents = text::read_file(file.string());
  try {
    return json::parse(contents);
  } catch (const json::parse_error& e) {
    throw FormatError(file.string(), text::line_of_offset(contents, e.byte), e.what());
  }
}

json edges_to_json(const EdgeSet& edges) { return edge_list_to_json(edges); }

EdgeSet edges_from_json(const json& arr, const std::string& file) {
  if (!arr.is_array()) throw FormatError(file, 0, "expected an array of [u,v] pairs");
  EdgeSet out;
  for (const json& pair : arr) {
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_integer() || !pair[1].is_number_integer()) {
      throw FormatError(file, 0, "malformed edge " + pair.dump());
    }
    try {
      out.insert(Edge(pair[0].get<int>(), pair[1].get<int>()));
    } catch (const InvalidArgument& e) {
      throw FormatError(file, 0, e.what());
    }
  }
  return out;
}

namespace {

struct Meta {
  int n = 0;
  int num_classes = 0;
  bool has_features = false;
};

Meta read_meta(const fs::path& file) {
  const json j = parse_json_file(file);
  Meta m;
  try {
    m.n = j.at("n").get<int>();
    m.num_classes = j.at("num_classes").get<int>();
    m.has_features = j.at("has_features").get<bool>();
  } catch (const json::exception& e) {
    throw FormatError(file.string(), 1, e.what());
  }
  if (m.n < 1) throw ConsistencyError(file.string() + ": n must be positive");
  return m;
}

std::vector<std::string_view> lines_of(std::string_view contents) {
  std::vector<std::string_view> lines = text::split(contents, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

Matrix read_edges(const fs::path& file, int n) {
  const std::string contents = text::read_file(file.string());
  Matrix a = Matrix::Zero(n, n);
  std::size_t line_no = 0;
  for (std::string_view line : lines_of(contents)) {
    ++line_no;
    const auto fields = text::split(line, ',');
    long long u = 0;
    long long v = 0;
    if (fields.size() != 2 || !text::parse_int(fields[0], u) || !text::parse_int(fields[1], v)) {
      throw FormatError(file.string(), line_no, "expected 'u,v'");
    }
    if (u < 0 || u >= v) throw FormatError(file.string(), line_no, "edge must satisfy 0 <= u < v");
    if (v >= n) throw ConsistencyError(file.string() + ":" + std::to_string(line_no) + ": node index out of range");
    if (a(u, v) != 0.0) throw FormatError(file.string(), line_no, "duplicate edge");
    a(u, v) = 1.0;
    a(v, u) = 1.0;
  }
  return a;
}

Matrix read_features(const fs::path& file, int n) {
  const std::string contents = text::read_file(file.string());
  const auto lines = lines_of(contents);
  if (static_cast<int>(lines.size()) != n) {
    throw ConsistencyError(file.string() + ": expected " + std::to_string(n) + " rows, found " +
                           std::to_string(lines.size()));
  }
  Matrix x;
  for (int i = 0; i < n; ++i) {
    const auto fields = text::split(lines[static_cast<std::size_t>(i)], ',');
    if (i == 0) x.resize(n, static_cast<Eigen::Index>(fields.size()));
    if (static_cast<Eigen::Index>(fields.size()) != x.cols()) {
      throw FormatError(file.string(), static_cast<std::size_t>(i) + 1, "ragged row");
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      double v = 0.0;
      if (!text::parse_double(fields[c], v)) {
        throw FormatError(file.string(), static_cast<std::size_t>(i) + 1, "bad number '" + std::string(fields[c]) + "'");
      }
      x(i, static_cast<Eigen::Index>(c)) = v;
    }
  }
  return x;
}

std::vector<int> read_labels(const fs::path& file, int n) {
  const std::string contents = text::read_file(file.string());
  const auto lines = lines_of(contents);
  if (static_cast<int>(lines.size()) != n) {
    throw ConsistencyError(file.string() + ": expected " + std::to_string(n) + " labels");
  }
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    long long y = 0;
    if (!text::parse_int(lines[i], y)) throw FormatError(file.string(), i + 1, "bad label");
    labels[i] = static_cast<int>(y);
  }
  return labels;
}

Split read_splits(const fs::path& file) {
  const json j = parse_json_file(file);
  Split s;
  try {
    s.train = j.at("train").get<std::vector<int>>();
    s.val = j.at("val").get<std::vector<int>>();
    s.test = j.at("test").get<std::vector<int>>();
  } catch (const json::exception& e) {
    throw FormatError(file.string(), 1, e.what());
  }
  return s;
}

}  // namespace

GraphBundle load_bundle(const fs::path& dir) {
  const Meta meta = read_meta(dir / "meta.json");
  Matrix a = read_edges(dir / "edges.csv", meta.n);
  std::optional<Matrix> x;
  if (meta.has_features) x = read_features(dir / "features.csv", meta.n);
  std::optional<std::vector<int>> labels;
  if (fs::exists(dir / "labels.csv")) labels = read_labels(dir / "labels.csv", meta.n);
  Split split = read_splits(dir / "splits.json");
  return GraphBundle(std::move(a), std::move(x), std::move(labels), meta.num_classes, std::move(split));
}

void save_bundle(const GraphBundle& b, const fs::path& dir) {
  fs::create_directories(dir);
  json meta = {{"n", b.n()}, {"num_classes", b.num_classes()}, {"has_features", b.has_features()}};
  text::write_file((dir / "meta.json").string(), meta.dump(2) + "\n");

  std::string edges;
  for (const Edge& e : b.edge_list()) edges += std::to_string(e.u) + "," + std::to_string(e.v) + "\n";
  text::write_file((dir / "edges.csv").string(), edges);

  if (b.has_features()) {
    const Matrix& x = b.features();
    std::string out;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (Eigen::Index c = 0; c < x.cols(); ++c) {
        if (c) out += ',';
        out += text::format_double(x(i, c));
      }
      out += '\n';
    }
    text::write_file((dir / "features.csv").string(), out);
  } else if (fs::exists(dir / "features.csv")) {
    fs::remove(dir / "features.csv");
  }

  if (b.has_labels()) {
    std::string out;
    for (int y : b.labels()) out += std::to_string(y) + "\n";
    text::write_file((dir / "labels.csv").string(), out);
  }

  json splits = {{"train", b.split().train}, {"val", b.split().val}, {"test", b.split().test}};
  text::write_file((dir / "splits.json").string(), splits.dump() + "\n");
}

PoisonRecord load_poison(const fs::path& file) {
  const json j = parse_json_file(file);
  if (!j.is_object() || !j.contains("inserted") || !j.contains("deleted")) {
    throw FormatError(file.string(), 1, "expected {\"inserted\": [...], \"deleted\": [...]}");
  }
  PoisonRecord r;
  r.inserted = edges_from_json(j.at("inserted"), file.string());
  r.deleted = edges_from_json(j.at("deleted"), file.string());
  if (intersection_size(r.inserted, r.deleted) != 0) {
    throw ConsistencyError(file.string() + ": a pair is both inserted and deleted");
  }
  return r;
}

void save_poison(const PoisonRecord& r, const fs::path& file) {
  json j = {{"inserted", edges_to_json(r.inserted)}, {"deleted", edges_to_json(r.deleted)}};
  text::write_file(file.string(), j.dump() + "\n");
}

std::optional<PoisonRecord> load_poison_sidecar(const fs::path& dir) {
  if (!fs::exists(dir / "poison.json")) return std::nullopt;
  return load_poison(dir / "poison.json");
}

}  // namespace gsan
