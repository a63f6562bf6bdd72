#pragma once

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "xorproto/protocol.hpp"
#include "xorproto/term.hpp"

namespace xorproto::corpus {

/// A random two-party protocol of two or three messages alternating
/// between A and B. A originates NA in the first message, B originates NB
/// in the second; both are secret. Bodies are tuples over what the sender
/// knows, possibly with an XOR of two known items, under pk(receiver),
/// sh(A,B) or a hash. No tags are inserted.
inline Protocol random_protocol(std::mt19937& rng, const std::string& name) {
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  Term A = make_var("A", sorts::kAgent);
  Term B = make_var("B", sorts::kAgent);
  Term NA = make_var("NA", sorts::kNonce);
  Term NB = make_var("NB", sorts::kNonce);
  Protocol p;
  p.name = name;
  p.variables = {A, B, NA, NB};
  p.fresh = {NA, NB};
  p.secret = {NA, NB};
  std::vector<Term> knows_a{A, B, NA};
  std::vector<Term> knows_b{A, B, NB};
  const std::size_t n = 2 + pick(2);
  for (std::size_t i = 0; i < n; ++i) {
    const bool from_a = i % 2 == 0;
    auto& known = from_a ? knows_a : knows_b;
    Term receiver = from_a ? B : A;
    std::vector<Term> body;
    if (i == 0) body.push_back(NA);
    if (i == 1) body.push_back(NB);
    std::size_t extra = pick(3);
    for (std::size_t k = 0; k < extra; ++k) {
      Term x = known[pick(known.size())];
      if (std::find(body.begin(), body.end(), x) == body.end()) body.push_back(x);
    }
    if (pick(2) == 0 && known.size() >= 2) {
      Term x = known[pick(known.size())];
      Term y = known[pick(known.size())];
      if (!(x == y)) body.push_back(xor_of(x, y));
    }
    if (body.empty()) body.push_back(known[pick(known.size())]);
    std::shuffle(body.begin(), body.end(), rng);
    Term plain = body.size() == 1 ? body.front() : seq(body);
    Term msg;
    switch (i == 0 || i == 1 ? pick(2) : pick(3)) {
      case 0: msg = penc(plain, pk(receiver)); break;
      case 1: msg = senc(plain, sh(A, B)); break;
      default: msg = hash_of(plain); break;
    }
    if (i == 1 && pick(3) == 0) msg = seq({msg, A});
    p.messages.push_back({static_cast<int>(i + 1), from_a ? "A" : "B", from_a ? "B" : "A", msg});
    // The receiver learns what it can read.
    auto& other = from_a ? knows_b : knows_a;
    if (msg.kind() != Kind::Hash) {
      for (const auto& v : {NA, NB}) {
        if (std::find(other.begin(), other.end(), v) == other.end() && subterms(plain).count(v)) {
          bool readable = false;
          for (const auto& b : body) readable = readable || b == v;
          if (readable) other.push_back(v);
        }
      }
    }
  }
  return p;
}

}  // namespace xorproto::corpus
