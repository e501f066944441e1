"""The noncommutative core.

The propagator of the model,

    C(p) = 1 / (p^2 + m^2 + a/(theta^2 p^2)),

splits into the ordinary massive propagator minus a correction carrying two
auxiliary masses m1, m2 (the roots of theta^2 x^2 - theta^2 m^2 x + a read as
an equation in -x).  Expanding a product of L such propagators yields 2^L
terms indexed by the subset S of lines taking the correction; each term is a
Gaussian integral over the loop momenta whose symbolic reduction produces a
first polynomial U_theta and an exponent numerator W.

Phases: on Moyal space every vertex carries an oscillation.  After
contracting a spanning tree, the surviving phase is read off the rosette
word as

    exp(-(i/2) * sum_{a<b} mu_a ^ mu_b),

where mu runs over the inflowing momenta at the rosette vertex (+-k_j for
the two ends of loop line j, +p_e for leg e) and ^ is the symplectic product
k^p = theta*(k_x p_y - k_y p_x) per 2x2 block of the noncommutativity
matrix.  This collapses to a signed chord-crossing matrix between loops plus
a per-leg coupling vector marking which loop chords overarch which legs.

Gaussian reduction: in complex block coordinates z_j = k_jx + i*k_jy the
exponent is -(zbar^T A z + zbar.b + bbar.z + s)/1 with A = M(beta) -
(theta/2)*Nmat, M the beta-weighted loop Gram matrix.  Loops are integrated
one at a time; the elimination is performed fraction-free (Bareiss), so all
intermediate numerators are polynomials and the running denominators are
the leading principal minors f_1, f_2, ... of A, the last one being
U_theta = det A.  The final scalar equals the bordered determinant
det [[A, b], [bbar, s]], i.e. the exponent is exactly -W/U_theta.  The
space dimension D never enters U_theta or W; it only sets the power
U_theta^(-D/2).

External bookkeeping: border entries keep the external momenta as formal
complex coordinates Z_e; products Zbar_e Z_f appearing in the final scalar
map to s_e_f + (i/theta) w_e_f.  Any surviving antisymmetric (wedge) part is
stored on the reserved w_e_f symbols with an implicit factor i; it vanishes
on every graph of the test corpus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import ConstraintError, InternalCheckError, StructuralError
from .poly import Polynomial, VariableRegistry, divexact, poly_det
from .ribbon import RibbonGraph, Rosette, contract_to_rosette, topology
from .routing import MomentumRouting, SpanningTree, route_momenta, spanning_trees
from .symanzik import loop_form_matrix


# -- model parameters and the propagator split ------------------------------


@dataclass(frozen=True)
class ModelParameters:
    """Mass, noncommutativity scale, coupling of the 1/p^2 term, dimension.

    Any of m_sq, theta, a may be None, meaning it stays a symbol.  When all
    three are numeric they must satisfy theta^2 m^4 / 4 >= a > 0 and
    theta > 0.
    """

    m_sq: Fraction | None = None
    theta: Fraction | None = None
    a: Fraction | None = None
    D: int = 4

    def __post_init__(self):
        if self.D <= 0 or self.D % 2 != 0:
            raise ConstraintError(f"D must be a positive even integer, got {self.D}")
        for field in ("m_sq", "theta", "a"):
            value = getattr(self, field)
            if value is not None:
                object.__setattr__(self, field, Fraction(value))
        if self.is_numeric():
            _check_parameter_domain(self.m_sq, self.theta, self.a)

    def is_numeric(self) -> bool:
        return None not in (self.m_sq, self.theta, self.a)


def _check_parameter_domain(m_sq: Fraction, theta: Fraction, a: Fraction) -> None:
    if theta <= 0:
        raise ConstraintError(f"theta must be positive, got {theta}")
    if not (Fraction(1, 4) * theta ** 2 * m_sq ** 2 >= a > 0):
        raise ConstraintError(
            f"need theta^2*m^4/4 >= a > 0, got theta^2*m^4/4 = "
            f"{Fraction(1, 4) * theta ** 2 * m_sq ** 2} and a = {a}")


@dataclass(frozen=True)
class MassSpectrum:
    """The two auxiliary squared masses; None means kept symbolic."""

    m1_sq: Fraction | float | None
    m2_sq: Fraction | float | None

    def is_symbolic(self) -> bool:
        return self.m1_sq is None


def _exact_sqrt(value: Fraction) -> Fraction | None:
    if value < 0:
        return None
    num = math.isqrt(value.numerator)
    den = math.isqrt(value.denominator)
    if num * num == value.numerator and den * den == value.denominator:
        return Fraction(num, den)
    return None


def split_propagator(params: ModelParameters, policy: str = "symbolic") -> MassSpectrum:
    """Auxiliary masses of the propagator split.

    policy:
      * "symbolic" - keep m1^2, m2^2 as the registry symbols (default);
      * "exact"    - exact rationals; fails if the discriminant is not a
                     perfect rational square;
      * "float"    - double precision roots.

    Numeric policies require fully numeric parameters and raise
    ConstraintError when the discriminant theta^4 m^4 - 4 theta^2 a is
    negative, i.e. when theta^2 m^4/4 >= a > 0 fails.
    """
    if policy == "symbolic":
        return MassSpectrum(None, None)
    if policy not in ("exact", "float"):
        raise StructuralError(f"unknown policy {policy!r}")
    if not params.is_numeric():
        raise ConstraintError("numeric mass roots need numeric m^2, theta, a")
    m_sq, theta, a = params.m_sq, params.theta, params.a
    disc = theta ** 4 * m_sq ** 2 - 4 * theta ** 2 * a
    if disc < 0:
        raise ConstraintError(
            "discriminant theta^4 m^4 - 4 theta^2 a is negative; "
            "the model requires theta^2*m^4/4 >= a > 0")
    if policy == "float":
        root = math.sqrt(float(disc))
        m1 = (float(theta ** 2 * m_sq) - root) / float(2 * theta ** 2)
        m2 = (float(theta ** 2 * m_sq) + root) / float(2 * theta ** 2)
        return MassSpectrum(m1, m2)
    root = _exact_sqrt(disc)
    if root is None:
        raise StructuralError(
            "the discriminant is not a perfect rational square; "
            "use policy='float' for approximate roots")
    m1 = (theta ** 2 * m_sq - root) / (2 * theta ** 2)
    m2 = (theta ** 2 * m_sq + root) / (2 * theta ** 2)
    if m1 + m2 != m_sq or m1 * m2 != a / theta ** 2:
        raise InternalCheckError("mass roots fail their defining relations")
    return MassSpectrum(m1, m2)


def propagator_split_residual(p_sq: Fraction, params: ModelParameters) -> Fraction:
    """Exact difference between the direct propagator and its split form.

    Zero for every admissible rational point; the split form uses the exact
    auxiliary masses, so the discriminant must be a perfect square.
    """
    p_sq = Fraction(p_sq)
    spectrum = split_propagator(params, policy="exact")
    m_sq, theta, a = params.m_sq, params.theta, params.a
    direct = 1 / (p_sq + m_sq + a / (theta ** 2 * p_sq))
    split = (1 / (p_sq + m_sq)
             - (a / theta ** 2)
             / ((p_sq + m_sq) * (p_sq + spectrum.m1_sq) * (p_sq + spectrum.m2_sq)))
    return split - direct


def propagator_split_residual_float(p_sq: float, params: ModelParameters) -> float:
    p_sq = float(p_sq)
    spectrum = split_propagator(params, policy="float")
    m_sq, theta, a = float(params.m_sq), float(params.theta), float(params.a)
    direct = 1.0 / (p_sq + m_sq + a / (theta ** 2 * p_sq))
    split = (1.0 / (p_sq + m_sq)
             - (a / theta ** 2)
             / ((p_sq + m_sq) * (p_sq + spectrum.m1_sq) * (p_sq + spectrum.m2_sq)))
    return split - direct


# -- phase data --------------------------------------------------------------


@dataclass(frozen=True)
class PhaseData:
    """Oscillation data read off a rosette.

    The surviving phase is exp(i * sum_{j<k} nmat[j][k] k_j^k_k +
    i * sum_{j,e} couplings[j][e] k_j^p_e); nmat is the antisymmetric signed
    chord-crossing matrix, couplings[j][e] = +-1 when loop chord j overarches
    leg e (sign set by the line orientation), else 0.

    broken_faces groups the legs by their coupling vector u: one entry per
    distinct nonzero u, dropping the group that would carry the full external
    sum (whose momentum vanishes by conservation).
    """

    nmat: tuple[tuple[int, ...], ...]
    couplings: tuple[tuple[int, ...], ...]
    broken_faces: tuple[tuple[tuple[int, ...], tuple[str, ...]], ...]


def rosette_phase_data(rosette: Rosette, routing: MomentumRouting,
                       g: RibbonGraph) -> PhaseData:
    """Crossing matrix and leg couplings from the rosette word.

    Every pair of word positions contributes mu_a ^ mu_b to the total phase
    exponent -(1/2) sum_{a<b}; grouping by loop pair and by (loop, leg) pair
    gives even integer coefficients whose halves are the crossing counts and
    couplings.  Leg-leg phases are dropped (they factor out of every loop
    integral).
    """
    if tuple(rosette.tree) != tuple(routing.tree):
        raise StructuralError("rosette and routing use different trees")
    loops = routing.loops
    loop_pos = {line: j for j, line in enumerate(loops)}
    n_loops = len(loops)
    n_ext = len(g.externals)

    entries = []  # (kind, index, sign): momentum flowing into the vertex
    for token in rosette.word:
        if token[0] == "e":
            j = loop_pos[g.edge_index(token[1])]
            sign = -1 if token[2] == 0 else 1
            entries.append(("k", j, sign))
        else:
            entries.append(("p", g.ext_index(token[1]) - 1, 1))

    cross = [[0] * n_loops for _ in range(n_loops)]
    couple = [[0] * n_ext for _ in range(n_loops)]
    for a in range(len(entries)):
        ka, ia, sa = entries[a]
        for b in range(a + 1, len(entries)):
            kb, ib, sb = entries[b]
            if ka == "k" and kb == "k":
                if ia == ib:
                    continue
                j, k = (ia, ib) if ia < ib else (ib, ia)
                sign = sa * sb if ia < ib else -sa * sb
                cross[j][k] += sign
            elif ka == "k" and kb == "p":
                couple[ia][ib] += sa * sb
            elif ka == "p" and kb == "k":
                couple[ib][ia] -= sa * sb
            # leg-leg phases are dropped

    nmat = [[0] * n_loops for _ in range(n_loops)]
    for j in range(n_loops):
        for k in range(j + 1, n_loops):
            if cross[j][k] % 2:
                raise InternalCheckError("odd crossing accumulation")
            nmat[j][k] = -cross[j][k] // 2
            nmat[k][j] = -nmat[j][k]
    couplings = []
    for j in range(n_loops):
        row = []
        for e in range(n_ext):
            if couple[j][e] % 2:
                raise InternalCheckError("odd coupling accumulation")
            row.append(-couple[j][e] // 2)
        couplings.append(tuple(row))

    groups: dict[tuple[int, ...], list[str]] = {}
    for e in range(n_ext):
        u = tuple(couplings[j][e] for j in range(n_loops))
        if any(u):
            groups.setdefault(u, []).append(g.external_ids[e])
    broken = []
    for u in sorted(groups, key=lambda u: groups[u][0]):
        exts = tuple(groups[u])
        if len(exts) == n_ext:
            continue  # full external sum vanishes by conservation
        broken.append((u, exts))
    broken.sort(key=lambda item: item[1])

    return PhaseData(nmat=tuple(tuple(r) for r in nmat),
                     couplings=tuple(couplings),
                     broken_faces=tuple(broken))


# -- the first polynomial and the Gaussian engine ---------------------------


def _beta_gram(routing: MomentumRouting, betas: Sequence[Polynomial],
               reg: VariableRegistry) -> list[list[Polynomial]]:
    n_loops = len(routing.loops)
    matrix = [[Polynomial.zero(reg) for _ in range(n_loops)]
              for _ in range(n_loops)]
    for line, beta in enumerate(betas, start=1):
        row = routing.eps[line - 1]
        for j in range(n_loops):
            if not row[j]:
                continue
            for k in range(n_loops):
                if row[k]:
                    matrix[j][k] = matrix[j][k] + row[j] * row[k] * beta
    return matrix


def first_polynomial(routing: MomentumRouting, phases: PhaseData,
                     betas: Sequence[Polynomial],
                     reg: VariableRegistry) -> Polynomial:
    """U_theta = det(M(beta) + (theta/2) Nmat), the closed form of the
    iterated Gaussian integration.

    Antisymmetry of Nmat makes the determinant even in theta, which is
    asserted; at theta = 0 (or for planar graphs) this is the matrix-tree
    form of the commutative U.
    """
    n_loops = len(routing.loops)
    if n_loops == 0:
        return Polynomial.one(reg)
    matrix = _beta_gram(routing, betas, reg)
    half_theta = Fraction(1, 2) * reg.theta()
    for j in range(n_loops):
        for k in range(n_loops):
            if phases.nmat[j][k]:
                matrix[j][k] = matrix[j][k] + phases.nmat[j][k] * half_theta
    det = poly_det(matrix)
    for exps, _ in det.terms():
        if exps[reg.index("theta")] % 2:
            raise InternalCheckError("U_theta acquired an odd power of theta")
    return det


def _eliminated_externals(values: Sequence[int], n_ext: int) -> list[int]:
    if n_ext == 0:
        return []
    return [v - values[n_ext - 1] for v in values[:n_ext - 1]]


def gaussian_reduce(routing: MomentumRouting, phases: PhaseData,
                    betas: Sequence[Polynomial],
                    reg: VariableRegistry) -> tuple[Polynomial, Polynomial]:
    """Integrate the loop momenta one by one; return (U_theta, W).

    The quadratic form is maintained fraction-free: after eliminating r
    loops every stored coefficient is a polynomial and the implicit
    denominator is the r-th leading principal minor of A = M(beta) -
    (theta/2) Nmat (the f_r chain).  The last minor is U_theta and the fully
    reduced scalar is the bordered determinant W, so the exponent is exactly
    -W/U_theta.
    """
    n_loops = len(routing.loops)
    n_ext = reg.n_externals
    n_red = max(n_ext - 1, 0)
    zero = Polynomial.zero(reg)
    one = Polynomial.one(reg)
    half_theta = Fraction(1, 2) * reg.theta()

    A = _beta_gram(routing, betas, reg)
    for j in range(n_loops):
        for k in range(n_loops):
            if phases.nmat[j][k]:
                A[j][k] = A[j][k] - phases.nmat[j][k] * half_theta

    b = [[zero] * n_red for _ in range(n_loops)]
    bbar = [[zero] * n_red for _ in range(n_loops)]
    corner = [[zero] * n_red for _ in range(n_red)]

    for line, beta in enumerate(betas, start=1):
        eta = _eliminated_externals(routing.eta[line - 1], n_ext)
        eps_row = routing.eps[line - 1]
        for e in range(n_red):
            if not eta[e]:
                continue
            for j in range(n_loops):
                if eps_row[j]:
                    term = eps_row[j] * eta[e] * beta
                    b[j][e] = b[j][e] + term
                    bbar[j][e] = bbar[j][e] + term
            for f in range(n_red):
                if eta[f]:
                    corner[e][f] = corner[e][f] + eta[e] * eta[f] * beta
    for j in range(n_loops):
        coup = _eliminated_externals(phases.couplings[j], n_ext)
        for e in range(n_red):
            if coup[e]:
                b[j][e] = b[j][e] - coup[e] * half_theta
                bbar[j][e] = bbar[j][e] + coup[e] * half_theta

    prev = one
    for r in range(n_loops):
        pivot = A[r][r]
        if pivot.is_zero():
            raise InternalCheckError("zero leading denominator in the loop chain")
        for j in range(r + 1, n_loops):
            for k in range(r + 1, n_loops):
                A[j][k] = divexact(pivot * A[j][k] - A[j][r] * A[r][k], prev)
        for j in range(r + 1, n_loops):
            for e in range(n_red):
                b[j][e] = divexact(pivot * b[j][e] - A[j][r] * b[r][e], prev)
        for k in range(r + 1, n_loops):
            for e in range(n_red):
                bbar[k][e] = divexact(pivot * bbar[k][e] - bbar[r][e] * A[r][k], prev)
        for e in range(n_red):
            for f in range(n_red):
                corner[e][f] = divexact(
                    pivot * corner[e][f] - bbar[r][e] * b[r][f], prev)
        prev = pivot

    u_theta = prev if n_loops else one

    w = zero
    theta = reg.theta()
    for e in range(n_red):
        if not corner[e][e].is_zero():
            w = w + corner[e][e] * reg.s(e + 1, e + 1)
        for f in range(e + 1, n_red):
            sym = corner[e][f] + corner[f][e]
            if not sym.is_zero():
                w = w + sym * reg.s(e + 1, f + 1)
            diff = corner[e][f] - corner[f][e]
            if not diff.is_zero():
                # Wedge invariants carry an implicit factor i; see module doc.
                try:
                    w = w + divexact(diff, theta) * reg.w(e + 1, f + 1)
                except StructuralError as exc:
                    raise InternalCheckError(
                        "wedge part not divisible by theta") from exc
    return u_theta, w


# -- the 2^L expansion -------------------------------------------------------


@dataclass(frozen=True)
class AmplitudeTerm:
    """One of the 2^L terms: the lines in ``subset`` take the correction.

    The integrand is sign * (a/theta^2)^prefactor_power *
    utheta^(-D/2) * exp(-w/utheta) * exp(-mass_exponent), with
    beta_l = a_l for l outside the subset and a_l + a_l_1 + a_l_2 inside.
    """

    subset: tuple[int, ...]
    sign: int
    prefactor_power: int
    utheta: Polynomial
    w: Polynomial
    mass_exponent: Polynomial


@dataclass(frozen=True)
class AmplitudeExpansion:
    graph: RibbonGraph
    params: ModelParameters
    registry: VariableRegistry
    tree: tuple[int, ...]
    terms: tuple[AmplitudeTerm, ...]
    prefactor: tuple[int, int]  # (L, D), standing for pi^(L*D/2)


def line_betas(g: RibbonGraph, reg: VariableRegistry,
               subset: Sequence[int]) -> list[Polynomial]:
    chosen = set(subset)
    betas = []
    for i in range(1, g.L + 1):
        beta = reg.alpha(i)
        if i in chosen:
            beta = beta + reg.alpha_corr(i, 1) + reg.alpha_corr(i, 2)
        betas.append(beta)
    return betas


def expand_amplitude(g: RibbonGraph, params: ModelParameters,
                     reg: VariableRegistry | None = None,
                     tree: SpanningTree | None = None) -> AmplitudeExpansion:
    """All 2^L terms of the amplitude, enumerated by subset bitmask.

    Bit i-1 of the mask selects line i for the correction; the term with the
    empty subset comes first.  The result does not depend on the spanning
    tree (a tested invariant); the default is the lexicographically smallest
    one.
    """
    if reg is None:
        reg = VariableRegistry.for_graph(g.L, g.N)
    if tree is None:
        tree = spanning_trees(g)[0]
    routing = route_momenta(g, tree)
    rosette = contract_to_rosette(g, tree.edges)
    phases = rosette_phase_data(rosette, routing, g)

    msq = reg.var("msq")
    m1sq = reg.var("m1sq")
    m2sq = reg.var("m2sq")
    base_mass = Polynomial.zero(reg)
    for i in range(1, g.L + 1):
        base_mass = base_mass + reg.alpha(i) * msq

    terms = []
    for mask in range(2 ** g.L):
        subset = tuple(i for i in range(1, g.L + 1) if mask >> (i - 1) & 1)
        betas = line_betas(g, reg, subset)
        utheta, w = gaussian_reduce(routing, phases, betas, reg)
        mass = base_mass
        for i in subset:
            mass = mass + reg.alpha_corr(i, 1) * m1sq + reg.alpha_corr(i, 2) * m2sq
        terms.append(AmplitudeTerm(subset=subset,
                                   sign=-1 if len(subset) % 2 else 1,
                                   prefactor_power=len(subset),
                                   utheta=utheta, w=w, mass_exponent=mass))
    return AmplitudeExpansion(graph=g, params=params, registry=reg,
                              tree=tuple(tree.edges), terms=tuple(terms),
                              prefactor=(g.L, params.D))


# -- power counting ----------------------------------------------------------


@dataclass(frozen=True)
class PowerCounting:
    L: int
    n: int
    g: int
    N: int
    min_deg: int
    omega: int
    closed_form: int | None  # (N-4)/2 + 4g; only at D=4 with quartic vertices


def power_counting(g: RibbonGraph, params: ModelParameters,
                   expansion: AmplitudeExpansion | None = None) -> PowerCounting:
    """Superficial degree of divergence from the alpha -> rho*alpha rescaling.

    min_deg is the minimal total alpha-degree of the commutative-sector
    U_theta, bounded below by L - (n-1) - 2g; omega = L - (D/2)*min_deg.
    At D = 4 with quartic vertices the closed form (N-4)/2 + 4g must agree,
    else an internal consistency error is raised.  The graph is
    UV-divergent iff omega <= 0 under this sign convention.
    """
    if expansion is None:
        expansion = expand_amplitude(g, params)
    reg = expansion.registry
    u0 = expansion.terms[0].utheta
    rho = reg.var("rho")
    rescale = {name: rho * reg.var(name) for name in reg.alpha_like}
    min_deg = u0.substitute(rescale).partial_degree(["rho"])[0]

    _, summary = topology(g)
    bound = g.L - (g.n - 1) - 2 * summary.g
    if min_deg < bound:
        raise InternalCheckError(
            f"min alpha-degree {min_deg} below the bound {bound}")
    if (params.D * min_deg) % 2:
        raise InternalCheckError("omega is not an integer")
    omega = g.L - params.D * min_deg // 2

    closed_form = None
    quartic = all(len(cycle) == 4 for _, cycle in g.vertices)
    if params.D == 4 and quartic:
        if g.N % 2:
            raise InternalCheckError("quartic graph with odd leg count")
        closed_form = (g.N - 4) // 2 + 4 * summary.g
        if closed_form != omega:
            raise InternalCheckError(
                f"rescaling omega {omega} disagrees with the closed form "
                f"{closed_form}")
    return PowerCounting(L=g.L, n=g.n, g=summary.g, N=g.N,
                         min_deg=min_deg, omega=omega, closed_form=closed_form)
