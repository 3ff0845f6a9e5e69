"""Rotational line lists from molecular constants.

Used to build the bundled offline corpus. Each molecule is described by a
small rotor model (linear, symmetric top with inversion, spherical top,
asymmetric top, or Hund's case (b) triplet for O2); energies come from an
effective Hamiltonian and line strengths from direction-cosine matrix
elements. Intensities follow the HITRAN convention at 296 K:

    S = C1 * nu * g_ns * S_rot * mu^2 * exp(-c2 E"/T) * (1 - exp(-c2 nu/T)) / Q * abundance

with C1 = 8 pi^3 / (3 h c) * 1e-36 (nu in cm^-1, mu in Debye, S in cm/molecule).
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import factorial, sqrt
from typing import Callable

import numpy as np

from .constants import SECOND_RADIATION, T_REF

# 8 pi^3 / (3 h c) with h, c in cgs, times 1 D^2 = 1e-36 esu^2 cm^2
INTENSITY_CONST = 8 * np.pi ** 3 / (3 * 6.62607015e-27 * 2.99792458e10) * 1e-36
# 64 pi^4 / (3 h) * 1e-36, A in s^-1 for nu in cm^-1 and mu^2 in D^2
EINSTEIN_CONST = 64 * np.pi ** 4 / (3 * 6.62607015e-27) * 1e-36
BOHR_MAGNETON_DEBYE = 9.2740100783e-21 / 1e-18
ELECTRON_G = 2.00231930436


# ---------------------------------------------------------------- angular momentum


def _tri(a, b, c):
    return Fraction(factorial(a + b - c) * factorial(a - b + c) * factorial(-a + b + c), factorial(a + b + c + 1))


@lru_cache(maxsize=None)
def wigner_3j(j1, j2, j3, m1, m2, m3):
    """3j symbol for integer arguments (Racah formula, exact arithmetic)."""
    if m1 + m2 + m3 != 0 or abs(m1) > j1 or abs(m2) > j2 or abs(m3) > j3:
        return 0.0
    if j3 < abs(j1 - j2) or j3 > j1 + j2:
        return 0.0
    pre = _tri(j1, j2, j3) * (
        factorial(j1 + m1) * factorial(j1 - m1) * factorial(j2 + m2)
        * factorial(j2 - m2) * factorial(j3 + m3) * factorial(j3 - m3)
    )
    kmin = max(0, j2 - j3 - m1, j1 - j3 + m2)
    kmax = min(j1 + j2 - j3, j1 - m1, j2 + m2)
    total = Fraction(0)
    for k in range(kmin, kmax + 1):
        den = (factorial(k) * factorial(j3 - j2 + k + m1) * factorial(j3 - j1 + k - m2)
               * factorial(j1 + j2 - j3 - k) * factorial(j1 - k - m1) * factorial(j2 - k + m2))
        total += Fraction((-1) ** k, den)
    if total == 0:
        return 0.0
    sign = (-1) ** ((j1 - j2 - m3) % 2) * (1 if total > 0 else -1)
    return sign * sqrt(float(pre * total * total))


@lru_cache(maxsize=None)
def wigner_6j(j1, j2, j3, j4, j5, j6):
    """6j symbol for integer arguments (Racah formula)."""
    triads = ((j1, j2, j3), (j1, j5, j6), (j4, j2, j6), (j4, j5, j3))
    for a, b, c in triads:
        if c < abs(a - b) or c > a + b:
            return 0.0
    pre = Fraction(1)
    for a, b, c in triads:
        pre *= _tri(a, b, c)
    sums = [sum(t) for t in triads]
    tops = (j1 + j2 + j4 + j5, j2 + j3 + j5 + j6, j3 + j1 + j6 + j4)
    total = Fraction(0)
    for t in range(max(sums), min(tops) + 1):
        den = 1
        for s in sums:
            den *= factorial(t - s)
        for u in tops:
            den *= factorial(u - t)
        total += Fraction((-1) ** t * factorial(t + 1), den)
    if total == 0:
        return 0.0
    return (1 if total > 0 else -1) * sqrt(float(pre * total * total))


# ---------------------------------------------------------------- line table


@dataclass
class LineTable:
    """Transitions as parallel arrays; quantum labels are preformatted strings."""

    nu: np.ndarray
    intensity: np.ndarray
    einstein_a: np.ndarray
    e_lower: np.ndarray
    g_upper: np.ndarray
    g_lower: np.ndarray
    q_upper: list
    q_lower: list

    def __len__(self):
        return len(self.nu)

    @classmethod
    def concat(cls, tables):
        tables = [t for t in tables if len(t)]
        if not tables:
            return cls(*(np.zeros(0) for _ in range(6)), [], [])
        return cls(
            *(np.concatenate([getattr(t, f) for t in tables]) for f in ("nu", "intensity", "einstein_a", "e_lower", "g_upper", "g_lower")),
            sum((t.q_upper for t in tables), []),
            sum((t.q_lower for t in tables), []),
        )

    def select(self, mask):
        idx = np.flatnonzero(mask)
        return LineTable(
            self.nu[idx], self.intensity[idx], self.einstein_a[idx], self.e_lower[idx],
            self.g_upper[idx], self.g_lower[idx],
            [self.q_upper[i] for i in idx], [self.q_lower[i] for i in idx],
        )


def boltzmann(e, t=T_REF):
    return np.exp(-SECOND_RADIATION * np.asarray(e, dtype=float) / t)


def line_intensity(nu, s_mu2, g_ns, e_lower, q_total, abundance=1.0, t=T_REF):
    """HITRAN-convention intensity (cm/molecule) from a line strength in D^2."""
    nu = np.asarray(nu, dtype=float)
    stim = -np.expm1(-SECOND_RADIATION * nu / t)
    return INTENSITY_CONST * nu * g_ns * s_mu2 * boltzmann(e_lower, t) * stim / q_total * abundance


def einstein_a(nu, s_mu2, g_upper_rot):
    return EINSTEIN_CONST * np.asarray(nu, dtype=float) ** 3 * s_mu2 / g_upper_rot


def _table(nu, s_mu2, g_ns, e_low, g_up, g_low, q_up, q_low, q_total, abundance):
    nu = np.asarray(nu, dtype=float)
    s_mu2 = np.asarray(s_mu2, dtype=float)
    g_ns = np.broadcast_to(np.asarray(g_ns, dtype=float), nu.shape)
    g_up = np.asarray(g_up, dtype=float)
    return LineTable(
        nu=nu,
        intensity=line_intensity(nu, s_mu2, g_ns, e_low, q_total, abundance),
        einstein_a=einstein_a(nu, s_mu2, g_up / np.where(g_ns > 0, g_ns, 1)),
        e_lower=np.asarray(e_low, dtype=float),
        g_upper=g_up,
        g_lower=np.asarray(g_low, dtype=float),
        q_upper=list(q_up),
        q_lower=list(q_low),
    )


# ---------------------------------------------------------------- linear molecules


@dataclass
class LinearRotor:
    """Closed-shell linear molecule; pure rotational R-branch J -> J+1."""

    b: float  # cm^-1
    d: float  # cm^-1
    mu: float  # Debye
    g_ns: float = 1.0
    q_vib: float = 1.0
    abundance: float = 1.0
    j_max: int = 120

    def energy(self, j):
        x = j * (j + 1.0)
        return self.b * x - self.d * x * x

    def partition_function(self, t=T_REF):
        j = np.arange(self.j_max + 200)
        return float(np.sum(self.g_ns * (2 * j + 1) * boltzmann(self.energy(j), t))) * self.q_vib

    def lines(self):
        j = np.arange(self.j_max)
        nu = self.energy(j + 1) - self.energy(j)
        s = self.mu ** 2 * (j + 1)
        q = self.partition_function()
        g_ns = self.g_ns
        return _table(nu, s, g_ns, self.energy(j), g_ns * (2 * j + 3), g_ns * (2 * j + 1),
                      [f"{'':10}{jj + 1:5d}" for jj in j], [f"{'':5}R{jj:4d}{'':5}" for jj in j], q, self.abundance)


# ---------------------------------------------------------------- symmetric top with inversion (NH3)


@dataclass
class InvertingSymmetricTop:
    """Oblate symmetric top with inversion doubling (ammonia-like).

    Inversion splitting follows nu_inv = v0 + vj J(J+1) + vk K^2 (cm^-1).
    For K = 0 only one inversion component exists: 'a' for even J, 's' for odd J.
    Spin weights refer to the merged +/-K level: K multiple of 3 gets ``g_ortho``.
    """

    b: float
    c: float
    dj: float
    djk: float
    dk: float
    mu: float
    inv0: float
    inv_j: float
    inv_k: float
    g_ortho: float = 12.0
    g_para: float = 6.0
    q_vib: float = 1.0
    abundance: float = 1.0
    j_max: int = 30

    def _levels(self, j_max):
        rows = []
        for j in range(j_max + 1):
            for k in range(j + 1):
                x = j * (j + 1.0)
                e = self.b * x + (self.c - self.b) * k * k - self.dj * x * x - self.djk * x * k * k - self.dk * k ** 4
                split = self.inv0 + self.inv_j * x + self.inv_k * k * k
                g = self.g_ortho if k % 3 == 0 else self.g_para
                for sym, sign in (("s", -1), ("a", +1)):
                    if k == 0 and sym != ("a" if j % 2 == 0 else "s"):
                        continue
                    rows.append((j, k, sym, e + sign * split / 2, g))
        e0 = min(r[3] for r in rows)
        return [(j, k, s, e - e0, g) for j, k, s, e, g in rows]

    def partition_function(self, t=T_REF):
        levels = self._levels(self.j_max + 20)
        return sum(g * (2 * j + 1) * float(boltzmann(e, t)) for j, k, _, e, g in levels) * self.q_vib

    def lines(self):
        q = self.partition_function()
        levels = {(j, k, s): (e, g) for j, k, s, e, g in self._levels(self.j_max + 1)}
        nu, strength, gns, elow, gup, glow, qu, ql = [], [], [], [], [], [], [], []
        for (j, k, s), (e, g) in levels.items():
            other = "a" if s == "s" else "s"
            # rotation-inversion: J -> J+1, same K, s <-> a
            for jj, factor in ((j + 1, ((j + 1) ** 2 - k * k) / (j + 1)), (j, k * k * (2 * j + 1) / (j * (j + 1)) if j else 0.0)):
                up = levels.get((jj, k, other))
                if up is None or factor <= 0 or jj > self.j_max:
                    continue
                eu = up[0]
                if eu <= e:
                    continue
                nu.append(eu - e)
                strength.append(self.mu ** 2 * factor)
                gns.append(g)
                elow.append(e)
                gup.append(g * (2 * jj + 1))
                glow.append(g * (2 * j + 1))
                qu.append(f"{jj:5d}{k:3d}{other:>2}{'':5}")
                ql.append(f"{j:5d}{k:3d}{s:>2}{'':5}")
        return _table(nu, strength, gns, elow, gup, glow, qu, ql, q, self.abundance)


# ---------------------------------------------------------------- spherical top (CH4)


@dataclass
class SphericalTop:
    """Tetrahedral rotor with centrifugal-distortion dipole; one line per R(J) manifold.

    The manifold strength scales as (J+1)^2 (J+2)^2 (2J+1)/(2J+3); ``theta``
    (Debye) sets the overall scale. Spin weight is the classical average 16/12.
    """

    b: float
    d: float
    theta: float
    g_ns: float = 4.0 / 3.0
    q_vib: float = 1.0
    abundance: float = 1.0
    j_max: int = 40

    def energy(self, j):
        x = j * (j + 1.0)
        return self.b * x - self.d * x * x

    def partition_function(self, t=T_REF):
        j = np.arange(self.j_max + 60)
        return float(np.sum(self.g_ns * (2 * j + 1) ** 2 * boltzmann(self.energy(j), t))) * self.q_vib

    def lines(self):
        j = np.arange(self.j_max)
        nu = self.energy(j + 1) - self.energy(j)
        s = self.theta ** 2 * (j + 1.0) ** 2 * (j + 2.0) ** 2 * (2 * j + 1) / (2 * j + 3)
        # level degeneracy (2J+1) from the K-like quantum number folds into g_ns
        g = self.g_ns * (2 * j + 1)
        q = self.partition_function()
        return _table(nu, s, g, self.energy(j), self.g_ns * (2 * j + 3) ** 2, self.g_ns * (2 * j + 1) ** 2,
                      [f"{'':10}{jj + 1:5d}" for jj in j], [f"{'':5}R{jj:4d}{'':5}" for jj in j], q, self.abundance)


# ---------------------------------------------------------------- O2 (Hund's case b triplet, magnetic dipole)


@dataclass
class TripletSigma:
    """^3Sigma_g^- diatomic with only odd N (16O2). Magnetic-dipole lines.

    For each J the N = J-1 and N = J+1 components mix through the spin-spin
    constant lambda; N = J is unmixed.
    """

    b: float = 1.437676
    d: float = 4.84e-6
    lam: float = 1.984751
    gamma: float = -0.008446
    q_vib: float = 1.0
    abundance: float = 1.0
    n_max: int = 51

    def _rot(self, n):
        x = n * (n + 1.0)
        return self.b * x - self.d * x * x

    def _states(self, j):
        """Eigenstates with total angular momentum J as (energy, {N: coeff}) pairs."""
        out = []
        if j % 2 == 1:
            out.append((self._rot(j) + 2 * self.lam / 3 - self.gamma, {j: 1.0}))
        hi = self._rot(j + 1) - self.gamma * (j + 2) - 2 * self.lam / 3 * (j + 2) / (2 * j + 1)
        if j == 0:
            if (j + 1) % 2 == 1:
                out.append((hi, {j + 1: 1.0}))
            return out
        lo = self._rot(j - 1) + self.gamma * (j - 1) - 2 * self.lam / 3 * (j - 1) / (2 * j + 1)
        off = 2 * self.lam / (2 * j + 1) * sqrt(j * (j + 1))
        w, v = np.linalg.eigh([[lo, off], [off, hi]])
        for i in range(2):
            coeffs = {j - 1: v[0, i], j + 1: v[1, i]}
            coeffs = {n: c for n, c in coeffs.items() if n % 2 == 1}
            if not coeffs:
                continue
            dominant = (j - 1) if abs(v[0, i]) >= abs(v[1, i]) else (j + 1)
            if dominant % 2 == 0:
                continue
            out.append((w[i], coeffs))
        return out

    def levels(self, j_max):
        rows = []
        for j in range(j_max + 1):
            for e, coeffs in self._states(j):
                n = max(coeffs, key=lambda k: abs(coeffs[k]))
                rows.append((j, n, e, coeffs))
        e0 = min(r[2] for r in rows)
        return [(j, n, e - e0, c) for j, n, e, c in rows]

    def partition_function(self, t=T_REF):
        return sum((2 * j + 1) * float(boltzmann(e, t)) for j, _, e, _ in self.levels(self.n_max + 40)) * self.q_vib

    @staticmethod
    def _spin_reduced(n, j1, j2):
        # <N S J2 || S || N S J1> for S = 1
        return ((-1) ** ((n + 1 + j1 + 1) % 2) * sqrt((2 * j1 + 1) * (2 * j2 + 1))
                * wigner_6j(1, j2, n, j1, 1, 1) * sqrt(6.0))

    def lines(self):
        q = self.partition_function()
        levels = self.levels(self.n_max + 1)
        mu = ELECTRON_G * BOHR_MAGNETON_DEBYE
        nu, strength, elow, gup, glow, qu, ql = [], [], [], [], [], [], []
        for jl, nl, el, cl in levels:
            for ju, nu_, eu, cu in levels:
                if eu <= el or abs(ju - jl) > 1 or (ju == jl == 0):
                    continue
                amp = sum(cu[n] * cl[n] * self._spin_reduced(n, jl, ju) for n in set(cl) & set(cu))
                s = amp * amp
                if s < 1e-12:
                    continue
                nu.append(eu - el)
                strength.append(s * mu ** 2)
                elow.append(el)
                gup.append(2 * ju + 1)
                glow.append(2 * jl + 1)
                qu.append(f"{'':5}{nu_:3d}{ju:3d}{'':4}")
                ql.append(f"{'':5}{nl:3d}{jl:3d}{'':4}")
        return _table(nu, strength, 1.0, elow, gup, glow, qu, ql, q, self.abundance)


# ---------------------------------------------------------------- asymmetric top


@dataclass
class AsymmetricTop:
    """Watson A-reduced Hamiltonian in the I^r representation (z = a, x = b, y = c).

    Constants in cm^-1; dipole components in Debye. ``spin_weight(ka, kc)``
    returns the nuclear-spin statistical weight (0 for missing levels).
    """

    a: float
    b: float
    c: float
    delta_j: float = 0.0
    delta_jk: float = 0.0
    delta_k: float = 0.0
    small_delta_j: float = 0.0
    small_delta_k: float = 0.0
    phi_j: float = 0.0
    phi_jk: float = 0.0
    phi_kj: float = 0.0
    phi_k: float = 0.0
    mu_a: float = 0.0
    mu_b: float = 0.0
    spin_weight: Callable = field(default=lambda ka, kc: 1.0)
    q_vib: float = 1.0
    abundance: float = 1.0
    j_max: int = 40

    def hamiltonian(self, j):
        """Matrix in the |J,K> basis, K = -J..J."""
        k = np.arange(-j, j + 1, dtype=float)
        x = j * (j + 1.0)
        diag = (
            (self.b + self.c) / 2 * x + (self.a - (self.b + self.c) / 2) * k ** 2
            - self.delta_j * x ** 2 - self.delta_jk * x * k ** 2 - self.delta_k * k ** 4
            + self.phi_j * x ** 3 + self.phi_jk * x ** 2 * k ** 2 + self.phi_kj * x * k ** 4 + self.phi_k * k ** 6
        )
        h = np.diag(diag)
        for i in range(len(k) - 2):
            k0 = k[i]
            f = (x - k0 * (k0 + 1)) * (x - (k0 + 1) * (k0 + 2))
            if f <= 0:
                continue
            off = ((self.b - self.c) / 4 - self.small_delta_j * x
                   - self.small_delta_k / 2 * (k0 ** 2 + (k0 + 2) ** 2)) * sqrt(f)
            h[i, i + 2] = h[i + 2, i] = off
        return h

    def levels(self, j):
        """Energies, (Ka, Kc) labels and eigenvectors (columns, |J,K> basis) for one J.

        Diagonalizes each Wang block separately so near-degenerate K doublets
        are never mixed.
        """
        h = self.hamiltonian(j)
        n = 2 * j + 1
        energies, labels, vectors = [], [], []
        for parity in (0, 1):
            for s in (+1, -1):
                ks = [kk for kk in range(0, j + 1) if kk % 2 == parity and not (kk == 0 and s < 0)]
                if not ks:
                    continue
                basis = np.zeros((n, len(ks)))
                for col, kk in enumerate(ks):
                    if kk == 0:
                        basis[j, col] = 1.0
                    else:
                        basis[j + kk, col] = 1 / sqrt(2)
                        basis[j - kk, col] = s / sqrt(2)
                w, v = np.linalg.eigh(basis.T @ h @ basis)
                kc_parity = (j + parity) % 2 if s > 0 else (j + parity + 1) % 2
                for idx in range(len(ks)):
                    ka = ks[idx]
                    kc = j - ka if (j - ka) % 2 == kc_parity else j - ka + 1
                    energies.append(w[idx])
                    labels.append((ka, kc))
                    vectors.append(basis @ v[:, idx])
        order = np.argsort(energies, kind="stable")
        return (np.asarray(energies)[order], [labels[i] for i in order], np.asarray(vectors).T[:, order])

    def _dipole_matrix(self, j_up, j_low):
        """M[K', K] = sum_q mu_q (-1)^K' 3j(J' 1 J; -K' q K), K' = K + q."""
        m = np.zeros((2 * j_up + 1, 2 * j_low + 1))
        mu_q = {0: self.mu_a, 1: -self.mu_b / sqrt(2), -1: self.mu_b / sqrt(2)}
        for kl in range(-j_low, j_low + 1):
            for q, mq in mu_q.items():
                if mq == 0:
                    continue
                ku = kl + q
                if abs(ku) > j_up:
                    continue
                m[ku + j_up, kl + j_low] += mq * (-1) ** (ku % 2) * wigner_3j(j_up, 1, j_low, -ku, q, kl)
        return m

    def all_levels(self, j_max):
        out = {}
        for j in range(j_max + 1):
            out[j] = self.levels(j)
        return out

    def partition_function(self, t=T_REF, j_max=None):
        j_max = self.j_max + 20 if j_max is None else j_max
        total = 0.0
        for j in range(j_max + 1):
            e, labels, _ = self.levels(j)
            g = np.array([self.spin_weight(ka, kc) for ka, kc in labels])
            total += float(np.sum(g * (2 * j + 1) * boltzmann(e, t)))
        return total * self.q_vib

    def lines(self, nu_max=np.inf, e_max=np.inf):
        q = self.partition_function()
        levels = self.all_levels(self.j_max + 1)
        e0 = min(levels[0][0])
        tables = []
        for jl in range(self.j_max + 1):
            for ju in (jl, jl + 1):
                el, lab_l, vl = levels[jl]
                eu, lab_u, vu = levels[ju]
                amp = vu.T @ self._dipole_matrix(ju, jl) @ vl
                s = (2 * jl + 1) * (2 * ju + 1) * amp ** 2
                gl = np.array([self.spin_weight(*lb) for lb in lab_l])
                gu = np.array([self.spin_weight(*lb) for lb in lab_u])
                iu, il = np.nonzero((s > 1e-10 * max(self.mu_a, self.mu_b) ** 2) & (gu[:, None] > 0) & (gl[None, :] > 0))
                if ju == jl:
                    keep = eu[iu] > el[il]
                    iu, il = iu[keep], il[keep]
                # for J -> J+1 pairs the J level may lie above; swap roles
                up_e, lo_e = eu[iu], el[il]
                flip = up_e < lo_e
                nu = np.abs(up_e - lo_e)
                e_low = np.where(flip, up_e, lo_e) - e0
                j_lo = np.where(flip, ju, jl)
                j_hi = np.where(flip, jl, ju)
                lab_lo = [lab_u[a] if f else lab_l[b] for a, b, f in zip(iu, il, flip)]
                lab_hi = [lab_l[b] if f else lab_u[a] for a, b, f in zip(iu, il, flip)]
                g_ns = gu[iu]
                keep = (nu <= nu_max) & (e_low <= e_max) & (nu > 0)
                tables.append(_table(
                    nu[keep], s[iu, il][keep], g_ns[keep], e_low[keep],
                    (g_ns * (2 * j_hi + 1))[keep], (g_ns * (2 * j_lo + 1))[keep],
                    [f"{jh:3d}{a:3d}{b:3d}{'':6}" for jh, (a, b), k in zip(j_hi, lab_hi, keep) if k],
                    [f"{jo:3d}{a:3d}{b:3d}{'':6}" for jo, (a, b), k in zip(j_lo, lab_lo, keep) if k],
                    q, self.abundance,
                ))
        return LineTable.concat(tables)


# ---------------------------------------------------------------- vibrational bands outside the THz range


@dataclass
class PerpendicularBand:
    """Pi <- Sigma fundamental of a linear molecule (e.g. the CO2 bending band)."""

    center: float
    b_lower: float
    b_upper: float
    mu_transition: float
    even_j_only: bool = True
    q_total: float = 1.0
    abundance: float = 1.0
    j_max: int = 100

    def lines(self):
        nu, s, el, gu, gl, qu, ql = [], [], [], [], [], [], []
        step = 2 if self.even_j_only else 1
        for j in range(0, self.j_max + 1, step):
            e_low = self.b_lower * j * (j + 1)
            branches = (("P", j - 1, (j - 1) / 2), ("Q", j, (2 * j + 1) / 2), ("R", j + 1, (j + 2) / 2))
            for name, ju, hl in branches:
                if ju < 1 or hl <= 0:
                    continue
                nu.append(self.center + self.b_upper * ju * (ju + 1) - e_low)
                s.append(self.mu_transition ** 2 * hl)
                el.append(e_low)
                gu.append(2 * ju + 1)
                gl.append(2 * j + 1)
                qu.append(f"{'':10}{ju:5d}")
                ql.append(f"{'':5}{name}{j:4d}{'':5}")
        return _table(nu, s, 1.0, el, gu, gl, qu, ql, self.q_total, self.abundance)


@dataclass
class QuadrupoleBand:
    """Electric-quadrupole O/Q/S branches of a homonuclear fundamental (e.g. N2 at 2330 cm^-1).

    Line strengths use Placzek-Teller factors scaled by ``strength`` (D^2 equivalent).
    """

    center: float
    b_lower: float
    b_upper: float
    strength: float
    g_even: float = 6.0
    g_odd: float = 3.0
    q_total: float = 1.0
    abundance: float = 1.0
    j_max: int = 40

    def lines(self):
        nu, s, gns, el, gu, gl, qu, ql = [], [], [], [], [], [], [], []
        for j in range(self.j_max + 1):
            e_low = self.b_lower * j * (j + 1)
            g = self.g_even if j % 2 == 0 else self.g_odd
            factors = (
                ("O", j - 2, 3 * j * (j - 1) / (2 * (2 * j - 1)) if j >= 2 else 0.0),
                ("Q", j, j * (j + 1) / ((2 * j - 1) * (2 * j + 3)) * (2 * j + 1) if j >= 1 else 0.0),
                ("S", j + 2, 3 * (j + 1) * (j + 2) / (2 * (2 * j + 3))),
            )
            for name, ju, pt in factors:
                if pt <= 0:
                    continue
                nu.append(self.center + self.b_upper * ju * (ju + 1) - e_low)
                s.append(self.strength * pt)
                gns.append(g)
                el.append(e_low)
                gu.append(g * (2 * ju + 1))
                gl.append(g * (2 * j + 1))
                qu.append(f"{'':10}{ju:5d}")
                ql.append(f"{'':5}{name}{j:4d}{'':5}")
        return _table(nu, s, gns, el, gu, gl, qu, ql, self.q_total, self.abundance)


# ---------------------------------------------------------------- spin statistics


def ortho_para(ortho=3.0, para=1.0):
    """H2O-like C2v weights: Ka+Kc odd is ortho."""
    return lambda ka, kc: ortho if (ka + kc) % 2 else para


def even_only(weight=1.0):
    """C2v molecules with two spin-0 equivalent nuclei: only Ka+Kc even exists."""
    return lambda ka, kc: 0.0 if (ka + kc) % 2 else weight
