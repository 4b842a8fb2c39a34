"""Reaction network description and its on-disk config format.

A network document is line oriented, UTF-8, with ``#`` starting a comment that
runs to end of line.  Blank lines are ignored.  Five sections appear in fixed
order::

    [species]
    A cp=75.24 h_ref=0 s_ref=50.6       # name, then key=value pairs
    [reactions]
    A -> B k0f=1.2e9 Ef=72331.8 k0b=1.33e8 Eb=74826
    [reactor]
    V=0.001 P=1e5 T_ref=300 lambda=0.05808 R_gas=8.314
    [inlet]
    T_in=310 c_A=2000                   # c_<name>, omitted species enter at 0
    [noise]
    rho1=0.1 rho2=5e-7 rho3=0.05

Reaction sides are ``+``-separated terms; a term is a species name with an
optional positive integer multiplicity prefix (``2A`` means two of ``A``).
``R_gas`` defaults to 8.314 J/(mol K); every other key shown is mandatory.
Within a section the key=value pairs may come in any order, and parsing is
deterministic.  ``serialize_network`` writes floats with shortest
round-tripping decimals, so parse -> serialize -> parse reproduces the
network field for field.

Units throughout: volume m^3, pressure Pa, temperatures K, heat capacities
J/(mol K), molar enthalpies J/mol, molar entropies J/(mol K), concentrations
mol/m^3, rate prefactors 1/s (times concentration powers), activation
energies J/mol, heat transfer coefficient J/(K s).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property

import numpy as np

R_GAS_DEFAULT = 8.314

_SECTION_ORDER = ("species", "reactions", "reactor", "inlet", "noise")
_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


class NetworkFormatError(ValueError):
    """Structural error in a network document (carries line and column)."""

    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class NetworkValidationError(ValueError):
    """A parsed document produced a network that violates its invariants."""

    def __init__(self, diagnostics: list[str]):
        super().__init__("; ".join(diagnostics))
        self.diagnostics = list(diagnostics)


@dataclass(frozen=True)
class Species:
    """One species: constant-pressure heat capacity and reference state."""

    name: str
    cp: float
    h_ref: float
    s_ref: float


@dataclass(frozen=True)
class Reaction:
    """One reversible mass-action reaction with Arrhenius rate constants.

    ``reactants``/``products`` hold one stoichiometric multiplicity per
    network species, aligned with the species order.
    """

    reactants: tuple[int, ...]
    products: tuple[int, ...]
    k0f: float
    Ef: float
    k0b: float
    Eb: float


@dataclass(frozen=True)
class ReactorSpec:
    """Vessel constants: volume, pressure, thermodynamic reference
    temperature, and jacket heat transfer coefficient."""

    V: float
    P: float
    T_ref: float
    lam: float
    R_gas: float = R_GAS_DEFAULT


@dataclass(frozen=True)
class InletSpec:
    """Feed temperature and feed concentrations (one per species)."""

    T_in: float
    c_in: tuple[float, ...]


@dataclass(frozen=True)
class NoiseSpec:
    """Noise intensities: rho1 on the reaction flux, rho2 on the inlet flow
    input, rho3 on the heat input."""

    rho1: float
    rho2: float
    rho3: float

    def scaled(self, f1: float = 1.0, f2: float = 1.0, f3: float = 1.0) -> "NoiseSpec":
        return NoiseSpec(self.rho1 * f1, self.rho2 * f2, self.rho3 * f3)


@dataclass(frozen=True)
class ReactionNetwork:
    """A validated reactor description: species, reactions, vessel, inlet,
    noise.  Immutable; derived numpy views are cached."""

    species: tuple[Species, ...]
    reactions: tuple[Reaction, ...]
    reactor: ReactorSpec
    inlet: InletSpec
    noise: NoiseSpec

    @property
    def n_species(self) -> int:
        return len(self.species)

    @property
    def n_reactions(self) -> int:
        return len(self.reactions)

    def species_index(self, name: str) -> int:
        for i, sp in enumerate(self.species):
            if sp.name == name:
                return i
        raise KeyError(name)

    @cached_property
    def species_names(self) -> tuple[str, ...]:
        return tuple(sp.name for sp in self.species)

    @cached_property
    def cp(self) -> np.ndarray:
        return np.array([sp.cp for sp in self.species])

    @cached_property
    def h_ref(self) -> np.ndarray:
        return np.array([sp.h_ref for sp in self.species])

    @cached_property
    def s_ref(self) -> np.ndarray:
        return np.array([sp.s_ref for sp in self.species])

    @cached_property
    def stoich_reactants(self) -> np.ndarray:
        """Reactant multiplicities, shape (n_species, n_reactions)."""
        if not self.reactions:
            return np.zeros((self.n_species, 0))
        return np.array([r.reactants for r in self.reactions], dtype=float).T

    @cached_property
    def stoich_products(self) -> np.ndarray:
        """Product multiplicities, shape (n_species, n_reactions)."""
        if not self.reactions:
            return np.zeros((self.n_species, 0))
        return np.array([r.products for r in self.reactions], dtype=float).T

    @cached_property
    def stoich_net(self) -> np.ndarray:
        """Net stoichiometry products-minus-reactants, per column one
        reaction."""
        return self.stoich_products - self.stoich_reactants

    @cached_property
    def c_in(self) -> np.ndarray:
        return np.array(self.inlet.c_in)

    @cached_property
    def k0f(self) -> np.ndarray:
        return np.array([r.k0f for r in self.reactions])

    @cached_property
    def k0b(self) -> np.ndarray:
        return np.array([r.k0b for r in self.reactions])

    @cached_property
    def Ef(self) -> np.ndarray:
        return np.array([r.Ef for r in self.reactions])

    @cached_property
    def Eb(self) -> np.ndarray:
        return np.array([r.Eb for r in self.reactions])

    def with_noise(self, noise: NoiseSpec) -> "ReactionNetwork":
        """Copy of this network with a different noise block."""
        return ReactionNetwork(self.species, self.reactions, self.reactor,
                               self.inlet, noise)


def validate(net: ReactionNetwork) -> list[str]:
    """Check every network invariant; return one diagnostic per violation.

    Each diagnostic names the offending field, e.g.
    ``"species.A.cp must be > 0"``.  An empty list means the network is
    valid.
    """
    diags: list[str] = []
    seen: set[str] = set()
    for sp in net.species:
        if not _NAME_RE.fullmatch(sp.name):
            diags.append(f"species name {sp.name!r} is not an identifier")
        if sp.name in seen:
            diags.append(f"species.{sp.name} duplicated")
        seen.add(sp.name)
        if not sp.cp > 0:
            diags.append(f"species.{sp.name}.cp must be > 0")
        if not np.isfinite(sp.h_ref):
            diags.append(f"species.{sp.name}.h_ref must be finite")
        if not np.isfinite(sp.s_ref):
            diags.append(f"species.{sp.name}.s_ref must be finite")
    if not net.species:
        diags.append("species must contain at least one entry")

    p = net.n_species
    for i, rxn in enumerate(net.reactions):
        if len(rxn.reactants) != p or len(rxn.products) != p:
            diags.append(f"reaction {i} stoichiometry length must equal the "
                         f"species count {p}")
            continue
        if any(k < 0 for k in rxn.reactants + rxn.products):
            diags.append(f"reaction {i} has a negative multiplicity")
        if rxn.reactants == rxn.products:
            diags.append(f"reaction {i} has zero net stoichiometry")
        for attr in ("k0f", "k0b"):
            if not getattr(rxn, attr) >= 0:
                diags.append(f"reactions[{i}].{attr} must be >= 0")
        for attr in ("Ef", "Eb"):
            if not getattr(rxn, attr) >= 0:
                diags.append(f"reactions[{i}].{attr} must be >= 0")

    r = net.reactor
    if not r.V > 0:
        diags.append("reactor.V must be > 0")
    if not r.P >= 0:
        diags.append("reactor.P must be >= 0")
    if not r.T_ref > 0:
        diags.append("reactor.T_ref must be > 0")
    if not r.lam >= 0:
        diags.append("reactor.lambda must be >= 0")
    if not r.R_gas > 0:
        diags.append("reactor.R_gas must be > 0")

    if not net.inlet.T_in > 0:
        diags.append("inlet.T_in must be > 0")
    if len(net.inlet.c_in) != p:
        diags.append(f"inlet.c_in length must equal the species count {p}")
    else:
        for name, c in zip(net.species_names, net.inlet.c_in):
            if not c >= 0:
                diags.append(f"inlet.c_{name} must be >= 0")
        if p and not any(c > 0 for c in net.inlet.c_in):
            diags.append("inlet.c_in must have at least one positive entry")

    for attr in ("rho1", "rho2", "rho3"):
        if not getattr(net.noise, attr) >= 0:
            diags.append(f"noise.{attr} must be >= 0")
    return diags


# ---------------------------------------------------------------------------
# parsing


def _tokenize(text: str):
    """Yield (line_no, [(col, token), ...]) with comments stripped."""
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        tokens = [(m.start() + 1, m.group()) for m in re.finditer(r"\S+", line)]
        if tokens:
            yield line_no, tokens


def _parse_float(text: str, line: int, col: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise NetworkFormatError(f"expected a number, got {text!r}", line, col) from None


def _parse_pairs(tokens, line: int) -> dict[str, float]:
    pairs = {}
    for col, tok in tokens:
        if "=" not in tok:
            raise NetworkFormatError(f"expected key=value, got {tok!r}", line, col)
        key, _, value = tok.partition("=")
        if not key:
            raise NetworkFormatError(f"missing key in {tok!r}", line, col)
        if key in pairs:
            raise NetworkFormatError(f"duplicate key {key!r}", line, col)
        pairs[key] = _parse_float(value, line, col + len(key) + 1)
    return pairs


def _require(pairs: dict[str, float], keys: tuple[str, ...], what: str, line: int) -> None:
    for key in keys:
        if key not in pairs:
            raise NetworkFormatError(f"{what} is missing mandatory key {key!r}", line)
    extra = set(pairs) - set(keys)
    if extra:
        raise NetworkFormatError(
            f"{what} has unknown key {sorted(extra)[0]!r}", line)


def _parse_side(text: str, names: list[str], line: int, col: int) -> list[int]:
    """Parse one reaction side like ``2A + B`` into per-species counts."""
    counts = [0] * len(names)
    for term in text.split("+"):
        term = term.strip()
        if not term:
            raise NetworkFormatError("empty term in reaction side", line, col)
        m = re.fullmatch(r"(\d*)\s*([A-Za-z_][A-Za-z0-9_]*)", term)
        if not m:
            raise NetworkFormatError(f"bad reaction term {term!r}", line, col)
        mult = int(m.group(1)) if m.group(1) else 1
        name = m.group(2)
        if name not in names:
            raise NetworkFormatError(f"unknown species {name!r} in reaction",
                                     line, col)
        counts[names.index(name)] += mult
    return counts


def parse_network(text: str) -> ReactionNetwork:
    """Parse a network document; raise on any structural or semantic error.

    Raises :class:`NetworkFormatError` (with line/column) for syntax
    problems — bad section order, malformed tokens, unknown species,
    missing mandatory keys, non-numeric values, duplicate species — and
    :class:`NetworkValidationError` if the parsed network fails
    :func:`validate`.
    """
    sections: dict[str, list] = {}
    current: str | None = None
    order_pos = -1
    for line_no, tokens in _tokenize(text):
        col0, tok0 = tokens[0]
        if tok0.startswith("["):
            if len(tokens) > 1:
                raise NetworkFormatError("section header must be alone on its line",
                                         line_no, tokens[1][0])
            name = tok0.strip("[]")
            if not (tok0.startswith("[") and tok0.endswith("]")) or name not in _SECTION_ORDER:
                raise NetworkFormatError(f"unknown section {tok0!r}", line_no, col0)
            pos = _SECTION_ORDER.index(name)
            if pos <= order_pos:
                raise NetworkFormatError(
                    f"section [{name}] out of order or repeated", line_no, col0)
            order_pos = pos
            current = name
            sections[name] = []
            continue
        if current is None:
            raise NetworkFormatError("content before first section header",
                                     line_no, col0)
        sections[current].append((line_no, tokens))

    missing = [s for s in _SECTION_ORDER if s not in sections]
    if missing:
        raise NetworkFormatError(f"missing section [{missing[0]}]",
                                 max((ln for ln, _ in _tokenize(text)), default=1))

    # species
    species: list[Species] = []
    names: list[str] = []
    for line_no, tokens in sections["species"]:
        col0, name = tokens[0]
        if "=" in name or not _NAME_RE.fullmatch(name):
            raise NetworkFormatError(f"expected species name, got {name!r}",
                                     line_no, col0)
        if name in names:
            raise NetworkFormatError(f"duplicate species {name!r}", line_no, col0)
        pairs = _parse_pairs(tokens[1:], line_no)
        _require(pairs, ("cp", "h_ref", "s_ref"), f"species {name}", line_no)
        species.append(Species(name, pairs["cp"], pairs["h_ref"], pairs["s_ref"]))
        names.append(name)
    if not species:
        raise NetworkFormatError("section [species] must not be empty", 1)

    # reactions
    reactions: list[Reaction] = []
    for line_no, tokens in sections["reactions"]:
        words = [t for _, t in tokens]
        if "->" not in words:
            raise NetworkFormatError("reaction line needs '->'", line_no,
                                     tokens[0][0])
        arrow = words.index("->")
        rate_start = next((i for i, t in enumerate(words) if "=" in t), len(words))
        if rate_start <= arrow:
            raise NetworkFormatError("reaction line needs '->'", line_no, tokens[0][0])
        lhs = " ".join(words[:arrow])
        rhs = " ".join(words[arrow + 1:rate_start])
        if not rhs:
            raise NetworkFormatError("reaction is missing a product side",
                                     line_no, tokens[arrow][0])
        reactants = _parse_side(lhs, names, line_no, tokens[0][0])
        products = _parse_side(rhs, names, line_no, tokens[arrow + 1][0])
        pairs = _parse_pairs(tokens[rate_start:], line_no)
        _require(pairs, ("k0f", "Ef", "k0b", "Eb"),
                 f"reaction {len(reactions)}", line_no)
        reactions.append(Reaction(tuple(reactants), tuple(products),
                                  pairs["k0f"], pairs["Ef"],
                                  pairs["k0b"], pairs["Eb"]))

    # reactor
    rx_pairs: dict[str, float] = {}
    for line_no, tokens in sections["reactor"]:
        rx_pairs.update(_parse_pairs(tokens, line_no))
    rx_line = sections["reactor"][0][0] if sections["reactor"] else 1
    for key in ("V", "P", "T_ref", "lambda"):
        if key not in rx_pairs:
            raise NetworkFormatError(f"[reactor] is missing mandatory key {key!r}",
                                     rx_line)
    known = {"V", "P", "T_ref", "lambda", "R_gas"}
    extra = set(rx_pairs) - known
    if extra:
        raise NetworkFormatError(f"[reactor] has unknown key {sorted(extra)[0]!r}",
                                 rx_line)
    reactor = ReactorSpec(rx_pairs["V"], rx_pairs["P"], rx_pairs["T_ref"],
                          rx_pairs["lambda"], rx_pairs.get("R_gas", R_GAS_DEFAULT))

    # inlet
    in_pairs: dict[str, float] = {}
    for line_no, tokens in sections["inlet"]:
        in_pairs.update(_parse_pairs(tokens, line_no))
    in_line = sections["inlet"][0][0] if sections["inlet"] else 1
    if "T_in" not in in_pairs:
        raise NetworkFormatError("[inlet] is missing mandatory key 'T_in'", in_line)
    c_in = [0.0] * len(names)
    for key, value in in_pairs.items():
        if key == "T_in":
            continue
        if not key.startswith("c_") or key[2:] not in names:
            raise NetworkFormatError(f"[inlet] has unknown key {key!r}", in_line)
        c_in[names.index(key[2:])] = value
    inlet = InletSpec(in_pairs["T_in"], tuple(c_in))

    # noise
    no_pairs: dict[str, float] = {}
    for line_no, tokens in sections["noise"]:
        no_pairs.update(_parse_pairs(tokens, line_no))
    no_line = sections["noise"][0][0] if sections["noise"] else 1
    for key in ("rho1", "rho2", "rho3"):
        if key not in no_pairs:
            raise NetworkFormatError(f"[noise] is missing mandatory key {key!r}",
                                     no_line)
    extra = set(no_pairs) - {"rho1", "rho2", "rho3"}
    if extra:
        raise NetworkFormatError(f"[noise] has unknown key {sorted(extra)[0]!r}",
                                 no_line)
    noise = NoiseSpec(no_pairs["rho1"], no_pairs["rho2"], no_pairs["rho3"])

    net = ReactionNetwork(tuple(species), tuple(reactions), reactor, inlet, noise)
    diags = validate(net)
    if diags:
        raise NetworkValidationError(diags)
    return net


# ---------------------------------------------------------------------------
# serialization


def _fmt(x: float) -> str:
    """Shortest decimal that round-trips to the same float."""
    return repr(float(x))


def _side_text(counts: tuple[int, ...], names: tuple[str, ...]) -> str:
    terms = []
    for mult, name in zip(counts, names):
        if mult == 0:
            continue
        terms.append(name if mult == 1 else f"{mult}{name}")
    return " + ".join(terms) if terms else "0"


def serialize_network(net: ReactionNetwork) -> str:
    """Render a network back to the config format.

    Floats are written with full round-trip precision, so
    ``parse_network(serialize_network(net)) == net`` field for field.
    """
    lines = ["[species]"]
    for sp in net.species:
        lines.append(f"{sp.name} cp={_fmt(sp.cp)} h_ref={_fmt(sp.h_ref)} "
                     f"s_ref={_fmt(sp.s_ref)}")
    lines.append("[reactions]")
    for rxn in net.reactions:
        lines.append(f"{_side_text(rxn.reactants, net.species_names)} -> "
                     f"{_side_text(rxn.products, net.species_names)} "
                     f"k0f={_fmt(rxn.k0f)} Ef={_fmt(rxn.Ef)} "
                     f"k0b={_fmt(rxn.k0b)} Eb={_fmt(rxn.Eb)}")
    r = net.reactor
    lines.append("[reactor]")
    lines.append(f"V={_fmt(r.V)} P={_fmt(r.P)} T_ref={_fmt(r.T_ref)} "
                 f"lambda={_fmt(r.lam)} R_gas={_fmt(r.R_gas)}")
    lines.append("[inlet]")
    inlet_parts = [f"T_in={_fmt(net.inlet.T_in)}"]
    for name, c in zip(net.species_names, net.inlet.c_in):
        if c != 0.0:
            inlet_parts.append(f"c_{name}={_fmt(c)}")
    lines.append(" ".join(inlet_parts))
    lines.append("[noise]")
    n = net.noise
    lines.append(f"rho1={_fmt(n.rho1)} rho2={_fmt(n.rho2)} rho3={_fmt(n.rho3)}")
    return "\n".join(lines) + "\n"
