#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "an2vec/model.hpp"
#include "an2vec/synthgen.hpp"

namespace an2vec {

/// A citation benchmark. Node order follows the content file; classes are
/// sorted by name so that line order does not matter.
struct CitationDataset {
  std::string name;
  FeaturedGraph graph;
  std::vector<std::string> class_names;
  std::vector<std::string> node_ids;  // external id of each node
  std::unordered_map<std::string, NodeId> id_map;
  std::size_t citation_lines = 0;
  std::size_t dropped_unknown = 0;  // citations naming an id absent from the content file
  std::size_t dropped_self = 0;     // self-citations
};

/// LINQS content/cites pair (Cora, CiteSeer). Content lines hold
/// "id w1 … wD label"; cites lines hold "cited citing". Edges are symmetrised.
CitationDataset load_content_cites(std::istream& content, std::istream& cites, const std::string& name = "");
CitationDataset load_content_cites(const std::filesystem::path& content_path,
                                   const std::filesystem::path& cites_path);

/// PubMed Diabetes tab-separated node and directed-cites files (two header
/// lines each). Features are the TF/IDF values, absent words are 0.
CitationDataset load_pubmed(std::istream& nodes, std::istream& cites, const std::string& name = "pubmed");
CitationDataset load_pubmed(const std::filesystem::path& node_path, const std::filesystem::path& cites_path);
/// Looks for Pubmed-Diabetes.NODE.paper.tab and Pubmed-Diabetes.DIRECTED.cites.tab in `dir`.
CitationDataset load_pubmed(const std::filesystem::path& dir);

/// Loads `<dir>/<stem>.content` and `<dir>/<stem>.cites`, or PubMed, by name
/// ("cora", "citeseer", "pubmed").
CitationDataset load_named_dataset(const std::string& name, const std::filesystem::path& dir);

/// Bernoulli for 0/1 features, Gaussian otherwise.
FeatureHead feature_head_for(const DenseMatrix& features);

}  // namespace an2vec
