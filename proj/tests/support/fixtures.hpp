#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "gbb/model.hpp"

namespace fixtures {

using namespace gbb;

inline constexpr VendorId s1{1}, s2{2};
inline constexpr BuyerId b1{0}, b2{1}, b3{2};

inline VendorTuple tup(VendorId a, VendorId b) { return {a, b}; }

// Two buyers, both end on s1's bundle; b2 needs a subsidy of 1.
inline Market e1() {
  Market m = Market::with_items(2);
  m.add_vendor("s1", {Money{4}, Money{4}}, {DiscountTier{{2, 2}, Money{5}}});
  m.add_vendor("s2", {Money{3}, Money{3}});
  m.add_buyer("b1", {{tup(s1, s1), Money{10}}, {tup(s2, s2), Money{6}}});
  m.add_buyer("b2", {{tup(s1, s1), Money{6}}, {tup(s2, s2), Money{8}}});
  return m;
}

inline Allocation e1_opt() { return Allocation{{tup(s1, s1), tup(s1, s1)}}; }

// Three buyers; b3 mixes vendors to push s1 over its threshold.
inline Market e2() {
  Market m = Market::with_items(2);
  m.add_vendor("s1", {Money{4}, Money{4}}, {DiscountTier{{3, 2}, Money{4}}});
  m.add_vendor("s2", {Money{3}, Money{3}});
  m.add_buyer("b1", {{tup(s1, s1), Money{9}}});
  m.add_buyer("b2", {{tup(s1, s1), Money{9}}});
  m.add_buyer("b3", {{tup(s1, s2), Money{6}}, {tup(s2, s2), Money{7}}});
  return m;
}

inline Allocation e2_opt() { return Allocation{{tup(s1, s1), tup(s1, s1), tup(s1, s2)}}; }

inline std::string data_path(const std::string& name) { return std::string(GBB_TEST_DATA) + "/" + name; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace fixtures
