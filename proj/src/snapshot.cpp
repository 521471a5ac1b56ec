#include "erase/snapshot.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <iterator>

#include "erase/errors.hpp"

namespace erase {
namespace {

using nlohmann::json;

json hex_vector(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) out.push_back(hex_bits(x));
  return out;
}

std::vector<double> vector_from_hex(const json& j) {
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& x : j) out.push_back(double_from_hex(x.get<std::string>()));
  return out;
}

json hex_matrix(const std::vector<std::vector<double>>& m) {
  json out = json::array();
  for (const auto& row : m) out.push_back(hex_vector(row));
  return out;
}

std::vector<std::vector<double>> matrix_from_hex(const json& j) {
  std::vector<std::vector<double>> out;
  for (const auto& row : j) out.push_back(vector_from_hex(row));
  return out;
}

json member_lists(const std::vector<std::vector<Member>>& lists) {
  json out = json::array();
  for (const auto& list : lists) {
    json l = json::array();
    for (const auto& m : list) l.push_back(json::array({m.id, hex_bits(m.distance)}));
    out.push_back(std::move(l));
  }
  return out;
}

std::vector<std::vector<Member>> member_lists_from(const json& j) {
  std::vector<std::vector<Member>> out;
  for (const auto& l : j) {
    std::vector<Member> list;
    for (const auto& m : l) list.push_back({m.at(0).get<ExampleId>(), double_from_hex(m.at(1).get<std::string>())});
    out.push_back(std::move(list));
  }
  return out;
}

json id_map(const std::map<ExampleId, std::uint32_t>& m) {
  json out = json::array();
  for (const auto& [id, c] : m) out.push_back(json::array({id, c}));
  return out;
}

std::map<ExampleId, std::uint32_t> id_map_from(const json& j) {
  std::map<ExampleId, std::uint32_t> out;
  for (const auto& e : j) out.emplace(e.at(0).get<ExampleId>(), e.at(1).get<std::uint32_t>());
  return out;
}

std::string_view to_string(PhaseCell c) { return c == PhaseCell::Epsilon ? "epsilon" : "centered_unit"; }

PhaseCell phase_cell_from(const std::string& s) {
  if (s == "epsilon") return PhaseCell::Epsilon;
  if (s == "centered_unit") return PhaseCell::CenteredUnit;
  throw Error(ErrorCode::SnapshotFormat, "unknown phase cell '" + s + "'");
}

std::string_view to_string(RetrainPolicy p) {
  return p == RetrainPolicy::ReplayRetained ? "replay_retained" : "fresh_seed";
}

RetrainPolicy retrain_policy_from(const std::string& s) {
  if (s == "replay_retained") return RetrainPolicy::ReplayRetained;
  if (s == "fresh_seed") return RetrainPolicy::FreshSeed;
  throw Error(ErrorCode::SnapshotFormat, "unknown retrain policy '" + s + "'");
}

template <typename Fn>
auto guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SnapshotFormat, e.what());
  }
}

}  // namespace

std::string hex_bits(double value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(std::bit_cast<std::uint64_t>(value)));
  return buf;
}

double double_from_hex(std::string_view hex) {
  if (hex.size() != 16) throw Error(ErrorCode::SnapshotFormat, "float hex must have 16 digits");
  std::uint64_t bits = 0;
  for (char c : hex) {
    std::uint64_t v = 0;
    if (c >= '0' && c <= '9') {
      v = static_cast<std::uint64_t>(c - '0');
    } else if (c >= 'a' && c <= 'f') {
      v = static_cast<std::uint64_t>(c - 'a' + 10);
    } else {
      throw Error(ErrorCode::SnapshotFormat, "bad hex digit in float");
    }
    bits = (bits << 4) | v;
  }
  return std::bit_cast<double>(bits);
}

json to_json(const LatticeSpec& spec) {
  return {{"epsilon", hex_bits(spec.epsilon)},
          {"theta", hex_vector(spec.theta)},
          {"seed_tag", spec.seed_tag},
          {"cell", to_string(spec.cell)}};
}

LatticeSpec lattice_from_json(const json& j) {
  return guarded([&] {
    LatticeSpec spec;
    spec.epsilon = double_from_hex(j.at("epsilon").get<std::string>());
    spec.theta = vector_from_hex(j.at("theta"));
    spec.seed_tag = j.at("seed_tag").get<Seed>();
    spec.cell = phase_cell_from(j.at("cell").get<std::string>());
    return spec;
  });
}

json to_json(const QkmModel& model) {
  json per_iter = json::array();
  for (const auto& iter : model.per_iter) {
    json clusters = json::array();
    for (const auto& s : iter) {
      json sum = json::array();
      for (const auto& acc : s.sum) sum.push_back(acc.to_hex());
      clusters.push_back({{"count", s.count},
                          {"sum", std::move(sum)},
                          {"centroid_unquantized", hex_vector(s.centroid_unquantized)},
                          {"centroid_quantized", hex_vector(s.centroid_quantized)}});
    }
    per_iter.push_back(std::move(clusters));
  }
  json trace = json::array();
  for (const auto& [id, t] : model.assign_trace) {
    json row = json::array({id});
    for (auto c : t) row.push_back(c);
    trace.push_back(std::move(row));
  }
  const auto& c = model.config;
  return {{"config",
           {{"k", c.k},
            {"epsilon", hex_bits(c.epsilon)},
            {"iters", c.iters},
            {"gamma", hex_bits(c.gamma)},
            {"phase_cell", to_string(c.phase_cell)},
            {"retrain_policy", to_string(c.retrain_policy)}}},
          {"spec", to_json(model.spec)},
          {"root_seed", model.root_seed},
          {"seed_ids", model.seed_ids},
          {"initial_centroids", hex_matrix(model.initial_centroids)},
          {"per_iter", std::move(per_iter)},
          {"assign_trace", std::move(trace)},
          {"final_cluster", id_map(model.final_cluster)},
          {"final_centroids", hex_matrix(model.final_centroids)},
          {"sorted_members", member_lists(model.sorted_members)},
          {"fallback", member_lists(model.fallback)},
          {"live_ids", model.live_ids},
          {"op_counter", model.op_counter}};
}

QkmModel qkm_from_json(const json& j) {
  return guarded([&] {
    QkmModel m;
    const auto& c = j.at("config");
    m.config.k = c.at("k").get<std::size_t>();
    m.config.epsilon = double_from_hex(c.at("epsilon").get<std::string>());
    m.config.iters = c.at("iters").get<std::size_t>();
    m.config.gamma = double_from_hex(c.at("gamma").get<std::string>());
    m.config.phase_cell = phase_cell_from(c.at("phase_cell").get<std::string>());
    m.config.retrain_policy = retrain_policy_from(c.at("retrain_policy").get<std::string>());
    m.spec = lattice_from_json(j.at("spec"));
    m.root_seed = j.at("root_seed").get<Seed>();
    m.seed_ids = j.at("seed_ids").get<std::vector<ExampleId>>();
    m.initial_centroids = matrix_from_hex(j.at("initial_centroids"));
    for (const auto& iter : j.at("per_iter")) {
      std::vector<ClusterIterStats> clusters;
      for (const auto& s : iter) {
        ClusterIterStats st;
        st.count = s.at("count").get<std::uint64_t>();
        for (const auto& h : s.at("sum")) st.sum.push_back(ExactSum::from_hex(h.get<std::string>()));
        st.centroid_unquantized = vector_from_hex(s.at("centroid_unquantized"));
        st.centroid_quantized = vector_from_hex(s.at("centroid_quantized"));
        clusters.push_back(std::move(st));
      }
      m.per_iter.push_back(std::move(clusters));
    }
    for (const auto& row : j.at("assign_trace")) {
      std::vector<std::uint32_t> t;
      for (std::size_t i = 1; i < row.size(); ++i) t.push_back(row.at(i).get<std::uint32_t>());
      m.assign_trace.emplace(row.at(0).get<ExampleId>(), std::move(t));
    }
    m.final_cluster = id_map_from(j.at("final_cluster"));
    m.final_centroids = matrix_from_hex(j.at("final_centroids"));
    m.sorted_members = member_lists_from(j.at("sorted_members"));
    m.fallback = member_lists_from(j.at("fallback"));
    m.live_ids = j.at("live_ids").get<std::vector<ExampleId>>();
    m.op_counter = j.at("op_counter").get<std::uint64_t>();
    if (m.per_iter.size() != m.config.iters || m.seed_ids.size() != m.config.k ||
        m.sorted_members.size() != m.config.k || m.fallback.size() != m.config.k) {
      throw Error(ErrorCode::SnapshotFormat, "quantized k-means state has inconsistent sizes");
    }
    return m;
  });
}

json to_json(const KmeansppModel& model) {
  return {{"k", model.k},
          {"iters", model.iters},
          {"root_seed", model.root_seed},
          {"seed_ids", model.seed_ids},
          {"centroids", hex_matrix(model.centroids)},
          {"assignment", id_map(model.assignment)},
          {"sorted_members", member_lists(model.sorted_members)},
          {"fallback", member_lists(model.fallback)},
          {"live_ids", model.live_ids},
          {"op_counter", model.op_counter}};
}

KmeansppModel kmeanspp_from_json(const json& j) {
  return guarded([&] {
    KmeansppModel m;
    m.k = j.at("k").get<std::size_t>();
    m.iters = j.at("iters").get<std::size_t>();
    m.root_seed = j.at("root_seed").get<Seed>();
    m.seed_ids = j.at("seed_ids").get<std::vector<ExampleId>>();
    m.centroids = matrix_from_hex(j.at("centroids"));
    m.assignment = id_map_from(j.at("assignment"));
    m.sorted_members = member_lists_from(j.at("sorted_members"));
    m.fallback = member_lists_from(j.at("fallback"));
    m.live_ids = j.at("live_ids").get<std::vector<ExampleId>>();
    m.op_counter = j.at("op_counter").get<std::uint64_t>();
    return m;
  });
}

json to_json(const SelectionModel& model) {
  json state = std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, RandomModel>) {
          return {{"k", s.k}, {"root_seed", s.root_seed}, {"live_ids", s.live_ids}};
        } else {
          return to_json(s);
        }
      },
      model.state);
  return {{"format", "erase-snapshot"},
          {"version", kSnapshotVersion},
          {"strategy", to_string(model.strategy)},
          {"k", model.k},
          {"selected", model.selected},
          {"deletions_applied", model.deletions_applied},
          {"state", std::move(state)}};
}

SelectionModel selection_from_json(const json& j) {
  return guarded([&] {
    if (j.at("format").get<std::string>() != "erase-snapshot") {
      throw Error(ErrorCode::SnapshotFormat, "not an erase snapshot");
    }
    if (j.at("version").get<int>() != kSnapshotVersion) {
      throw Error(ErrorCode::SnapshotFormat, "unsupported snapshot version");
    }
    SelectionModel m;
    m.strategy = strategy_from_string(j.at("strategy").get<std::string>());
    m.k = j.at("k").get<std::size_t>();
    m.selected = j.at("selected").get<std::vector<ExampleId>>();
    m.deletions_applied = j.at("deletions_applied").get<std::uint64_t>();
    const auto& s = j.at("state");
    switch (m.strategy) {
      case Strategy::Erase: m.state = qkm_from_json(s); break;
      case Strategy::Acot: m.state = kmeanspp_from_json(s); break;
      case Strategy::Random:
        m.state = RandomModel{s.at("k").get<std::size_t>(), s.at("root_seed").get<Seed>(),
                              s.at("live_ids").get<std::vector<ExampleId>>()};
        break;
    }
    if (m.selected.size() != m.k) throw Error(ErrorCode::SnapshotFormat, "selected size differs from k");
    return m;
  });
}

json selection_summary(const SelectionModel& model) {
  return {{"strategy", to_string(model.strategy)}, {"k", model.k}, {"selected", model.selected}};
}

std::string serialize_snapshot(const SelectionModel& model) { return to_json(model).dump() + "\n"; }

SelectionModel parse_snapshot(std::string_view text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::SnapshotFormat, "snapshot is not valid JSON");
  return selection_from_json(j);
}

void save_snapshot(const SelectionModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << serialize_snapshot(model);
}

SelectionModel load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse_snapshot(text);
}

std::string snapshot_hash(const SelectionModel& model) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(serialize_snapshot(model))));
  return buf;
}

}  // namespace erase
