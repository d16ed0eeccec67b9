#include "mer/serialize.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

using nlohmann::json;

namespace mer {
namespace {

std::string kernel_name(Kernel k) { return k == Kernel::Rbf ? "rbf" : "linear"; }

Kernel kernel_from(const std::string& s) {
  if (s == "rbf") return Kernel::Rbf;
  if (s == "linear") return Kernel::Linear;
  throw std::invalid_argument("unknown kernel '" + s + "'");
}

json matrix_to_json(const Matrix& m) {
  return json{{"rows", m.rows}, {"cols", m.cols}, {"data", m.data}};
}

Matrix matrix_from_json(const json& j) {
  Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  m.data = j.at("data").get<std::vector<double>>();
  return m;
}

}  // namespace

json to_json(const SvrParams& p) {
  return json{{"C", p.C},         {"epsilon", p.epsilon}, {"kernel", kernel_name(p.kernel)},
              {"gamma", p.gamma}, {"tol", p.tol},         {"max_passes", p.max_passes}};
}

SvrParams svr_params_from_json(const json& j) {
  SvrParams p;
  p.C = j.at("C").get<double>();
  p.epsilon = j.at("epsilon").get<double>();
  p.kernel = kernel_from(j.at("kernel").get<std::string>());
  p.gamma = j.at("gamma").get<double>();
  p.tol = j.at("tol").get<double>();
  p.max_passes = j.at("max_passes").get<std::size_t>();
  return p;
}

json to_json(const SvrModel& m) {
  return json{{"params", to_json(m.params)},
              {"support_vectors", matrix_to_json(m.support_vectors)},
              {"support_indices", m.support_indices},
              {"dual_coeffs", m.dual_coeffs},
              {"bias", m.bias},
              {"converged", m.converged},
              {"kkt_residual_at_exit", m.kkt_residual_at_exit},
              {"n_train", m.n_train}};
}

SvrModel svr_model_from_json(const json& j) {
  SvrModel m;
  m.params = svr_params_from_json(j.at("params"));
  m.support_vectors = matrix_from_json(j.at("support_vectors"));
  m.support_indices = j.at("support_indices").get<std::vector<std::size_t>>();
  m.dual_coeffs = j.at("dual_coeffs").get<std::vector<double>>();
  m.bias = j.at("bias").get<double>();
  m.converged = j.at("converged").get<bool>();
  m.kkt_residual_at_exit = j.at("kkt_residual_at_exit").get<double>();
  m.n_train = j.at("n_train").get<std::size_t>();
  return m;
}

json to_json(const ForestParams& p) {
  json j{{"n_trees", p.n_trees},
         {"criterion", "squared_error"},
         {"min_samples_split", p.min_samples_split},
         {"features_per_split", p.features_per_split},
         {"bootstrap", p.bootstrap}};
  if (p.max_depth) j["max_depth"] = *p.max_depth;
  return j;
}

ForestParams forest_params_from_json(const json& j) {
  ForestParams p;
  p.n_trees = j.at("n_trees").get<std::size_t>();
  p.min_samples_split = j.at("min_samples_split").get<std::size_t>();
  p.features_per_split = j.at("features_per_split").get<std::size_t>();
  p.bootstrap = j.at("bootstrap").get<bool>();
  if (j.contains("max_depth")) p.max_depth = j.at("max_depth").get<std::size_t>();
  return p;
}

namespace {

void flatten_tree(const TreeNode& node, json& nodes) {
  const auto my_index = nodes.size();
  nodes.push_back(json{{"feature", node.is_leaf() ? -1 : static_cast<long long>(node.feature_index)},
                       {"threshold", node.threshold},
                       {"value", node.value},
                       {"count", node.count},
                       {"sse", node.sse},
                       {"left", -1},
                       {"right", -1}});
  if (!node.is_leaf()) {
    nodes[my_index]["left"] = nodes.size();
    flatten_tree(*node.left, nodes);
    nodes[my_index]["right"] = nodes.size();
    flatten_tree(*node.right, nodes);
  }
}

std::unique_ptr<TreeNode> unflatten_tree(const json& nodes, std::size_t index) {
  const auto& n = nodes.at(index);
  auto node = std::make_unique<TreeNode>();
  node->threshold = n.at("threshold").get<double>();
  node->value = n.at("value").get<double>();
  node->count = n.at("count").get<std::size_t>();
  node->sse = n.at("sse").get<double>();
  const long long feature = n.at("feature").get<long long>();
  if (feature >= 0) {
    node->feature_index = static_cast<std::size_t>(feature);
    node->left = unflatten_tree(nodes, n.at("left").get<std::size_t>());
    node->right = unflatten_tree(nodes, n.at("right").get<std::size_t>());
  }
  return node;
}

}  // namespace

json to_json(const ForestModel& m) {
  json trees = json::array();
  for (const auto& tree : m.trees) {
    json nodes = json::array();
    flatten_tree(*tree, nodes);
    trees.push_back(std::move(nodes));
  }
  return json{{"params", to_json(m.params)},
              {"per_tree_seeds", m.per_tree_seeds},
              {"oob_indices", m.oob_indices},
              {"n_features", m.n_features},
              {"trees", std::move(trees)}};
}

ForestModel forest_model_from_json(const json& j) {
  ForestModel m;
  m.params = forest_params_from_json(j.at("params"));
  m.per_tree_seeds = j.at("per_tree_seeds").get<std::vector<std::uint64_t>>();
  m.oob_indices = j.at("oob_indices").get<std::vector<std::vector<std::size_t>>>();
  m.n_features = j.at("n_features").get<std::size_t>();
  for (const auto& nodes : j.at("trees")) m.trees.push_back(unflatten_tree(nodes, 0));
  return m;
}

json to_json(const EstimatorSpec& s) {
  return json{{"kind", to_string(s.kind)},
              {"svr", to_json(s.svr)},
              {"forest", to_json(s.forest)},
              {"forest_importance",
               s.forest_importance == ImportanceMode::Impurity ? "impurity" : "oob_mae"},
              {"svr_importance_folds", s.svr_importance_folds}};
}

EstimatorSpec estimator_spec_from_json(const json& j) {
  EstimatorSpec s;
  s.kind = estimator_kind_from(j.at("kind").get<std::string>());
  s.svr = svr_params_from_json(j.at("svr"));
  s.forest = forest_params_from_json(j.at("forest"));
  s.forest_importance = j.at("forest_importance").get<std::string>() == "impurity"
                            ? ImportanceMode::Impurity
                            : ImportanceMode::OobMaePermutation;
  s.svr_importance_folds = j.at("svr_importance_folds").get<std::size_t>();
  return s;
}

json to_json(const SelectedFeatureSet& s) {
  json scores = json::object();
  for (const auto& [size, score] : s.scores_by_size) {
    scores[std::to_string(size)] =
        json{{"mean", score.mean}, {"fold_scores", score.fold_scores}};
  }
  return json{{"selected_indices", s.selected_indices},
              {"selected_names", s.selected_names},
              {"scores_by_size", std::move(scores)},
              {"chosen_size", s.chosen_size},
              {"estimator", to_json(s.estimator)},
              {"target", s.target},
              {"master_seed", s.master_seed}};
}

SelectedFeatureSet sfs_from_json(const json& j) {
  SelectedFeatureSet s;
  s.selected_indices = j.at("selected_indices").get<std::vector<std::size_t>>();
  s.selected_names = j.at("selected_names").get<std::vector<std::string>>();
  for (const auto& [key, value] : j.at("scores_by_size").items()) {
    SizeScore score;
    score.mean = value.at("mean").get<double>();
    score.fold_scores = value.at("fold_scores").get<std::vector<double>>();
    s.scores_by_size[std::stoull(key)] = std::move(score);
  }
  s.chosen_size = j.at("chosen_size").get<std::size_t>();
  s.estimator = estimator_spec_from_json(j.at("estimator"));
  s.target = j.at("target").get<std::string>();
  s.master_seed = j.at("master_seed").get<std::uint64_t>();
  return s;
}

json to_json(const BenchmarkReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back(json{{"model", row.model},
                        {"target", row.target},
                        {"feature_set", row.feature_set},
                        {"n_features", row.n_features},
                        {"score", row.score},
                        {"std", row.std_dev},
                        {"fold_scores", row.fold_scores},
                        {"fold_losses", row.fold_losses},
                        {"plan_seed", row.plan_seed}});
  }
  json deltas = json::array();
  for (const auto& [key, delta] : r.deltas) {
    deltas.push_back(json{{"model", key.first},
                          {"target", key.second},
                          {"delta", delta},
                          {"reduction_rate", r.reduction_rates.at(key)}});
  }
  return json{{"rows", std::move(rows)},
              {"deltas", std::move(deltas)},
              {"k", r.k},
              {"master_seed", r.master_seed}};
}

void write_json_file(const json& j, const std::filesystem::path& path) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  json j;
  in >> j;
  return j;
}

void save_sfs(const SelectedFeatureSet& s, const std::filesystem::path& path) {
  write_json_file(to_json(s), path);
}

SelectedFeatureSet load_sfs(const std::filesystem::path& path) {
  return sfs_from_json(read_json_file(path));
}

}  // namespace mer
