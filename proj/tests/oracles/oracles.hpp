#pragma once

// Deliberately naive reimplementations used as test oracles. They read the
// raw corpus document only and share no code with the library algorithms.

#include <array>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "atlas/corpus.hpp"
#include "atlas/geography.hpp"
#include "atlas/importance.hpp"
#include "atlas/lineage.hpp"
#include "atlas/similarity_table.hpp"

namespace oracle {

// Three-colour depth-first search over (from, to) edges.
bool has_cycle(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges);

// painter id -> master ids over master/imitation relations.
std::map<std::string, std::set<std::string>> master_sets(const atlas::corpus::CorpusDocument& doc);

// Logic units by pairwise master-set comparison; each unit is a member set.
std::vector<std::set<std::string>> brute_force_units(const atlas::corpus::CorpusDocument& doc);

// Clusters in creation order, each as the list of unit member sets in the
// order they joined. Units are visited by (earliest member birth, smallest
// member id), recursing into unclassified parents first.
std::vector<std::vector<std::set<std::string>>> recursive_clusters(const atlas::corpus::CorpusDocument& doc,
                                                                   double theta);

// Every structural violation found in a forest; empty when it is sound.
std::vector<std::string> forest_violations(const atlas::lineage::InheritanceForest& f);

// Unnormalized label mass: own indicator plus 2^-r per distinct ancestor.
std::map<std::string, double> raw_importance(const atlas::corpus::CorpusDocument& doc, const std::string& painter,
                                             int max_depth = 6);

struct Score {
    double total = 0.0;
    std::array<double, 5> s{};
    std::array<bool, 5> available{};
};

// Term-by-term evaluation of the weighted five-dimension score for every
// painter outside the cohort.
std::map<std::string, Score> straight_line_scores(const atlas::corpus::CorpusDocument& doc,
                                                  const std::vector<atlas::LabelWeights>& weights,
                                                  const atlas::ArtisticSimilarityTable& ast,
                                                  const atlas::geo::Geography& geography,
                                                  const std::vector<std::string>& cohort,
                                                  const std::array<double, 5>& beta);

}  // namespace oracle
