"""
Date: October 19th, 2026

This file contains the operator algebra used by the rest of twinbeam:
first-order jets in the absorbance, bosonic ladder operators over the two
probe modes and the two loss-bath modes, noncommutative polynomials in those
operators, normal ordering and vacuum expectation values.

Coefficients may be python numbers or numpy arrays. With arrays, a single
symbolic pass evaluates a whole batch of probe configurations at once.

"""

from __future__ import annotations

import enum
import functools
import itertools
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, Iterator, List, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

Number = Union[int, float, complex, np.ndarray]


def _is_zero(x: Number) -> bool:
    return not np.any(x)


@dataclass(frozen=True)
class EpsJet:
    """A value and its first derivative in the absorbance, with eps**2 == 0."""

    value0: Number = 0.0
    """The coefficient at eps = 0."""
    dvalue: Number = 0.0
    """The coefficient of eps."""

    # numpy defers to our reflected operators instead of broadcasting over us
    __array_ufunc__ = None

    @classmethod
    def lift(cls, x: Union["EpsJet", Number]) -> "EpsJet":
        return x if isinstance(x, EpsJet) else cls(x, 0.0)

    @classmethod
    def eps(cls, scale: Number = 1.0) -> "EpsJet":
        return cls(0.0, scale)

    def __add__(self, other):
        o = EpsJet.lift(other)
        return EpsJet(self.value0 + o.value0, self.dvalue + o.dvalue)

    __radd__ = __add__

    def __neg__(self):
        return EpsJet(-self.value0, -self.dvalue)

    def __sub__(self, other):
        return self + (-EpsJet.lift(other))

    def __rsub__(self, other):
        return EpsJet.lift(other) - self

    def __mul__(self, other):
        if isinstance(other, EpsJet):
            return EpsJet(
                self.value0 * other.value0,
                self.value0 * other.dvalue + self.dvalue * other.value0,
            )
        return EpsJet(self.value0 * other, self.dvalue * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = EpsJet.lift(other)
        if np.any(np.asarray(o.value0) == 0):
            raise ZeroDivisionError("EpsJet division by a divisor vanishing at eps = 0")
        q = self.value0 / o.value0
        return EpsJet(q, (self.dvalue - q * o.dvalue) / o.value0)

    def conjugate(self) -> "EpsJet":
        return EpsJet(np.conj(self.value0), np.conj(self.dvalue))

    def is_zero(self) -> bool:
        return _is_zero(self.value0) and _is_zero(self.dvalue)

    def __repr__(self):
        return f"EpsJet({self.value0!r} + {self.dvalue!r} eps)"


ONE = EpsJet(1.0, 0.0)
ZERO = EpsJet(0.0, 0.0)


class Mode(enum.IntEnum):
    """The four bosonic modes: vacuum probe inputs and loss baths."""

    V1 = 0
    V2 = 1
    U1 = 2
    U2 = 3


NUM_MODES = len(Mode)


class ModeOp(NamedTuple):
    """A single ladder operator: the annihilator of a mode, or its adjoint."""

    mode: Mode
    dagger: bool = False

    def __repr__(self):
        return self.mode.name.lower() + ("†" if self.dagger else "")


class OperatorTerm(NamedTuple):
    coeff: EpsJet
    factors: Tuple[ModeOp, ...]


Word = Tuple[ModeOp, ...]
# per mode (creator count, annihilator count)
Signature = Tuple[Tuple[int, int], ...]


@functools.lru_cache(maxsize=None)
def _word_from_signature(sig: Signature) -> Word:
    word: List[ModeOp] = []
    for mode, (i, j) in zip(Mode, sig):
        word.extend([ModeOp(mode, True)] * i)
        word.extend([ModeOp(mode, False)] * j)
    return tuple(word)


@functools.lru_cache(maxsize=None)
def _swap_block(j: int, k: int) -> Tuple[Tuple[Tuple[int, int], int], ...]:
    """a^j a†^k as a sum of w * a†^(k-m) a^(j-m)."""
    return tuple(
        ((k - m, j - m), math.comb(j, m) * math.comb(k, m) * math.factorial(m))
        for m in range(min(j, k) + 1)
    )


@functools.lru_cache(maxsize=None)
def _order_mode(flags: Tuple[bool, ...]) -> Tuple[Tuple[Tuple[int, int], int], ...]:
    """Normal-orders a single-mode word given as its sequence of dagger flags."""
    current: Dict[Tuple[int, int], int] = {(0, 0): 1}
    for dagger, run in itertools.groupby(flags):
        k = len(list(run))
        following: Dict[Tuple[int, int], int] = defaultdict(int)
        for (i, j), c in current.items():
            if dagger:
                for (di, dj), w in _swap_block(j, k):
                    following[(i + di, dj)] += c * w
            else:
                following[(i, j + k)] += c
        current = following
    return tuple(sorted(current.items()))


class OperatorPoly:
    """
    A noncommutative polynomial in the ladder operators of the four modes,
    with EpsJet coefficients. Canonical polynomials hold only normal-ordered
    words in a fixed mode order, with like terms merged and zeros dropped.
    """

    __slots__ = ("_terms", "canonical", "_signatures")
    __array_ufunc__ = None

    def __init__(self, terms: Optional[Mapping[Word, EpsJet]] = None, canonical: bool = False):
        self._terms: Dict[Word, EpsJet] = {
            tuple(w): c for w, c in (terms or {}).items() if not c.is_zero()
        }
        self.canonical = canonical
        self._signatures: Optional[List[Tuple[Signature, EpsJet]]] = None

    @classmethod
    def zero(cls) -> "OperatorPoly":
        return cls({}, canonical=True)

    @classmethod
    def identity(cls, coeff: Union[EpsJet, Number] = 1.0) -> "OperatorPoly":
        return cls({(): EpsJet.lift(coeff)}, canonical=True)

    @classmethod
    def op(cls, mode: Mode, dagger: bool = False, coeff: Union[EpsJet, Number] = 1.0) -> "OperatorPoly":
        return cls({(ModeOp(Mode(mode), dagger),): EpsJet.lift(coeff)}, canonical=True)

    def items(self):
        return self._terms.items()

    @property
    def terms(self) -> List[OperatorTerm]:
        return [OperatorTerm(c, w) for w, c in self._terms.items()]

    def __len__(self):
        return len(self._terms)

    def __iter__(self) -> Iterator[OperatorTerm]:
        return iter(self.terms)

    @property
    def degree(self) -> int:
        return max((len(w) for w in self._terms), default=0)

    @property
    def constant(self) -> EpsJet:
        return self._terms.get((), ZERO)

    def modes(self) -> Tuple[Mode, ...]:
        return tuple(sorted({op.mode for w in self._terms for op in w}))

    def _combine(self, other: "OperatorPoly", sign: float) -> "OperatorPoly":
        merged = dict(self._terms)
        for w, c in other._terms.items():
            merged[w] = merged[w] + c * sign if w in merged else c * sign
        return OperatorPoly(merged, canonical=self.canonical and other.canonical)

    def __add__(self, other):
        if not isinstance(other, OperatorPoly):
            other = OperatorPoly.identity(other)
        return self._combine(other, 1.0)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, OperatorPoly):
            other = OperatorPoly.identity(other)
        return self._combine(other, -1.0)

    def __rsub__(self, other):
        return OperatorPoly.identity(other) - self

    def __neg__(self):
        return self.scale(-1.0)

    def scale(self, factor: Union[EpsJet, Number]) -> "OperatorPoly":
        return OperatorPoly({w: c * factor for w, c in self._terms.items()}, canonical=self.canonical)

    def __mul__(self, other):
        if isinstance(other, OperatorPoly):
            return multiply(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def dagger(self) -> "OperatorPoly":
        """The formal adjoint: reversed factors, flipped daggers, conjugated coefficients."""
        flipped = OperatorPoly(
            {
                tuple(ModeOp(op.mode, not op.dagger) for op in reversed(w)): c.conjugate()
                for w, c in self._terms.items()
            }
        )
        return normal_order(flipped) if self.canonical else flipped

    def at_eps_zero(self) -> "OperatorPoly":
        return OperatorPoly({w: EpsJet(c.value0, 0.0) for w, c in self._terms.items()}, canonical=self.canonical)

    def eps_part(self) -> "OperatorPoly":
        """The coefficient of eps, returned as an eps-free polynomial."""
        return OperatorPoly({w: EpsJet(c.dvalue, 0.0) for w, c in self._terms.items()}, canonical=self.canonical)

    def relabel(self, mapping: Mapping[Mode, Mode]) -> "OperatorPoly":
        """Renames modes, e.g. the V1 <-> V2, U1 <-> U2 exchange."""
        renamed = OperatorPoly(
            {tuple(ModeOp(mapping.get(op.mode, op.mode), op.dagger) for op in w): c for w, c in self._terms.items()}
        )
        return normal_order(renamed) if self.canonical else renamed

    def signature_terms(self) -> List[Tuple[Signature, EpsJet]]:
        if not self.canonical:
            return normal_order(self).signature_terms()
        if self._signatures is None:
            rows = []
            for w, c in self._terms.items():
                counts = [[0, 0] for _ in Mode]
                for op in w:
                    counts[op.mode][0 if op.dagger else 1] += 1
                rows.append((tuple(tuple(x) for x in counts), c))
            self._signatures = rows
        return self._signatures

    def __repr__(self):
        if not self._terms:
            return "OperatorPoly(0)"
        parts = [f"({c.value0}+{c.dvalue}ε){''.join(map(repr, w)) or '𝟙'}" for w, c in self._terms.items()]
        return "OperatorPoly(" + " + ".join(parts) + ")"


def multiply(p: OperatorPoly, q: OperatorPoly) -> OperatorPoly:
    """The formal noncommutative product. The result is not normal-ordered."""
    out: Dict[Word, EpsJet] = {}
    for w1, c1 in p.items():
        for w2, c2 in q.items():
            w = w1 + w2
            c = c1 * c2
            out[w] = out[w] + c if w in out else c
    return OperatorPoly(out, canonical=False)


def normal_order(p: OperatorPoly) -> OperatorPoly:
    """Rewrites p with every creator left of every annihilator, mode by mode."""
    if p.canonical:
        return p
    out: Dict[Word, EpsJet] = {}
    for word, coeff in p.items():
        per_mode: List[List[bool]] = [[] for _ in Mode]
        for op in word:
            per_mode[op.mode].append(op.dagger)
        expansions = [_order_mode(tuple(flags)) if flags else (((0, 0), 1),) for flags in per_mode]
        for combo in itertools.product(*expansions):
            sig = tuple(pair for pair, _ in combo)
            weight = math.prod(w for _, w in combo)
            key = _word_from_signature(sig)
            c = coeff * weight
            out[key] = out[key] + c if key in out else c
    return OperatorPoly(out, canonical=True)


def vacuum_expectation(p: OperatorPoly) -> EpsJet:
    """<0000| p |0000>, the identity coefficient of the normal-ordered form."""
    return normal_order(p).constant


def substitute_displacement(p: OperatorPoly, mode: Mode, amplitude: Number, phase: Number) -> OperatorPoly:
    """Replaces every ladder operator of `mode` by itself plus amplitude * exp(i phase)."""
    if np.any(np.asarray(amplitude) < 0):
        raise ValueError("Displacement amplitude must be non-negative")
    shift = amplitude * np.exp(1j * np.asarray(phase))
    if _is_zero(shift):
        return p
    plain = OperatorPoly.op(mode) + shift
    dagged = OperatorPoly.op(mode, True) + np.conj(shift)
    result = OperatorPoly.zero()
    for word, coeff in p.items():
        term = OperatorPoly.identity(coeff)
        for op in word:
            if op.mode == mode:
                factor = dagged if op.dagger else plain
            else:
                factor = OperatorPoly.op(op.mode, op.dagger)
            term = normal_order(multiply(term, factor))
        result = result + term
    return normal_order(result)


def _falling(n: int, k: int) -> int:
    return math.perm(n, k)


class VacuumBra:
    """
    The bra <0| X, where X is a polynomial in annihilators only. Multiplying
    on the right keeps that form, because any creator reordered to the far
    left is annihilated by <0|.
    """

    __slots__ = ("_states",)

    def __init__(self, states: Optional[Mapping[Tuple[int, ...], EpsJet]] = None):
        self._states: Dict[Tuple[int, ...], EpsJet] = (
            dict(states) if states is not None else {(0,) * NUM_MODES: ONE}
        )

    def __len__(self):
        return len(self._states)

    def apply(self, p: OperatorPoly) -> "VacuumBra":
        out: Dict[Tuple[int, ...], EpsJet] = {}
        terms = p.signature_terms()
        for state, c in self._states.items():
            for sig, t in terms:
                weight = 1
                landed = []
                for (i, j), s in zip(sig, state):
                    if i > s:
                        weight = 0
                        break
                    if i:
                        weight *= _falling(s, i)
                    landed.append(s - i + j)
                if not weight:
                    continue
                key = tuple(landed)
                val = c * t * weight
                out[key] = out[key] + val if key in out else val
        return VacuumBra({k: v for k, v in out.items() if not v.is_zero()})

    def value(self) -> EpsJet:
        return self._states.get((0,) * NUM_MODES, ZERO)


def vacuum_expectation_of_product(factors: Sequence[OperatorPoly]) -> EpsJet:
    """<0| f1 f2 ... fn |0> without expanding the full product."""
    bra = VacuumBra()
    for f in factors:
        bra = bra.apply(f)
    return bra.value()


def _ladder(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1)


def dense_matrix(p: OperatorPoly, dim: int, modes: Optional[Sequence[Mode]] = None, part: str = "value0") -> np.ndarray:
    """Matrix of p on a tensor product of Fock spaces truncated to `dim` levels."""
    modes = tuple(modes) if modes is not None else (p.modes() or (Mode.V1,))
    a = _ladder(dim)
    single = {False: a, True: a.conj().T}
    eye = np.eye(dim)
    total = np.zeros((dim ** len(modes),) * 2, dtype=complex)
    for word, coeff in p.items():
        mat = np.eye(dim ** len(modes), dtype=complex)
        for op in word:
            factors = [single[op.dagger] if m == op.mode else eye for m in modes]
            mat = mat @ functools.reduce(np.kron, factors)
        total += getattr(coeff, part) * mat
    return total
