// Copyright 2026 The quipsim Authors
// SPDX-License-Identifier: Apache-2.0

// State-vector model of entanglement swapping, independent of compose_bell.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <optional>

namespace quip::testing {

using Amp = std::complex<double>;
using TwoQubit = std::array<Amp, 4>;  // index 2*a + b

// |B_pq> = (I (x) X^q Z^p)|Phi+>, index = 2p + q.
inline TwoQubit bell_state(int index) {
  const int p = (index >> 1) & 1;
  const int q = index & 1;
  const double s = 1.0 / std::sqrt(2.0);
  TwoQubit out{};
  for (int a = 0; a < 2; ++a) {
    // Phi+ term |a a>; Z^p then X^q act on the second qubit.
    const double phase = (p && a == 1) ? -1.0 : 1.0;
    const int b = a ^ q;
    out[2 * a + b] += Amp(s * phase, 0.0);
  }
  return out;
}

// Prepares B_b1 on qubits (1,2) and B_b2 on (3,4), projects (2,3) onto B_m and
// returns the Bell index of the normalized state left on (1,4), if it is one.
inline std::optional<int> swap_oracle(int b1, int b2, int m) {
  const TwoQubit x = bell_state(b1);
  const TwoQubit y = bell_state(b2);
  const TwoQubit proj = bell_state(m);
  std::array<Amp, 16> psi{};
  for (int i = 0; i < 16; ++i) {
    const int q1 = (i >> 3) & 1, q2 = (i >> 2) & 1, q3 = (i >> 1) & 1, q4 = i & 1;
    psi[i] = x[2 * q1 + q2] * y[2 * q3 + q4];
  }
  TwoQubit rest{};
  for (int i = 0; i < 16; ++i) {
    const int q1 = (i >> 3) & 1, q2 = (i >> 2) & 1, q3 = (i >> 1) & 1, q4 = i & 1;
    rest[2 * q1 + q4] += std::conj(proj[2 * q2 + q3]) * psi[i];
  }
  double norm = 0;
  for (const Amp &a : rest) norm += std::norm(a);
  if (norm < 1e-12) return std::nullopt;
  for (int k = 0; k < 4; ++k) {
    const TwoQubit b = bell_state(k);
    Amp overlap = 0;
    for (int i = 0; i < 4; ++i) overlap += std::conj(b[i]) * rest[i];
    if (std::abs(std::norm(overlap) / norm - 1.0) < 1e-9) return k;
  }
  return std::nullopt;
}

}  // namespace quip::testing
