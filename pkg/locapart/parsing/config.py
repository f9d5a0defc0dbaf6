"""
Scenario configuration files

A scenario file has ``[section]`` headers followed by ``key = value``
lines.
Values are numbers, bare words, quoted strings,
or comma-separated tuples of those.
A ``#`` starts a comment that runs to the end of the line.

Example::

    [scenario]
    schema_version = 1
    mode = dynamics
    output = "runs/h2"

    [geometry]
    preset = h2
    R = 1.4

    [state]
    preset = gs_plus_e1

Exceptions:
    Error
    ConfigError

Interface Functions:
    parse_config
    load_config
    config_hash

Interface Classes:
    ScenarioConfig
"""

import hashlib
import logging
from dataclasses import dataclass, field

from locapart.chem.basis import REGISTRY, SYMBOLS
from locapart.chem.grid import TIERS, GridTier
from locapart.chem.manybody import COUPLINGS, SCHEMES
from locapart.parsing import lex
from locapart.parsing.token import (
    COMMA, EQUALS, LBRACK, RBRACK, EndToken, FloatToken, IntegerToken,
    LiteralToken, NameToken, NewlineToken, StringToken,
)

_log = logging.getLogger(__name__)

SCHEMA_VERSION = 1

MODES = ("dynamics", "decoherence", "limits", "naive_demo", "integrals_only")

GEOMETRY_PRESETS = ("h2", "h_pair", "h2_dimer", "h_atom")

STATE_PRESETS = {
    "1sA_2pzB": "1s on A and 2pz on B, spin coupled",
    "gs_plus_e1": "ground plus first excited singlet, equal weights",
    "gs_plus_e3": "ground plus third excited singlet, equal weights",
}

ORBITALS = ("lowdin", "rhf")

# Keys that may repeat inside their section
_ACCUMULATE = {("geometry", "atom")}

_SECTIONS = {
    "scenario": {"schema_version", "mode", "output", "seed", "label"},
    "geometry": {"preset", "R", "bond", "atom"},
    "basis": {"name"},
    "partition": {"rule", "normal", "offset"},
    "grid": {"tier", "scheme"} | set(GridTier._fields),
    "manybody": {"scheme", "orbitals", "coupling"},
    "state": {"preset", "weights"},
    "time": {"samples", "t_max", "periods"},
    "decoherence": {"sigma", "samples", "seed", "nodes", "r_eq_g", "nu_g",
                    "r_eq_e", "nu_e", "mass", "method"},
    "limits": {"separations", "bond"},
}


class Error(Exception):
    """A scenario file has a lexical or syntax error."""


class ConfigError(Error):
    """A parsed scenario does not satisfy the schema."""


class ConfigLexer(lex.RegexLexer):
    """Lexical analysis of scenario files"""

    def punct(self, text):
        """Push a punctuation token onto the token queue."""
        cls = self.PUNCTUATION[text]
        self.push_token(cls(text, self.lineno, self.offset))

    @lex.action(NewlineToken)
    def newline(self, text):
        return text

    @lex.action(StringToken)
    def string(self, text):
        return text[1:-1]

    @lex.action(FloatToken)
    def float_(self, text):
        return float(text)

    @lex.action(IntegerToken)
    def integer(self, text):
        return int(text)

    @lex.action(NameToken)
    def name(self, text):
        return text

    RULES = {
        "root": [
            (r"[ \t\r]+", lex.skip),
            (r"#[^\n]*", lex.skip),
            (r"\n", newline),
            (r"[\[\]=,]", punct),
            (r'"[^"\n]*"', string),
            (r"[+-]?(?:(?:\d+\.\d*|\.\d+)(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)(?![\w.+\-])",
             float_),
            (r"[+-]?\d+(?![\w.+\-])", integer),
            (r"[\w./][\w./+\-]*", name),
        ],
    }

    PUNCTUATION = {
        "[": LBRACK,
        "]": RBRACK,
        "=": EQUALS,
        ",": COMMA,
    }


def _expect_token(lexer, types):
    """Return the next token, or raise an exception."""
    tok = next(lexer)
    if any(isinstance(tok, t) for t in types):
        return tok
    fstr = "unexpected {} {!r} (line: {}, offset: {})"
    raise Error(fstr.format(type(tok).__name__, tok.value, tok.lineno, tok.offset))


def parse_config(s):
    """
    Parse the text of a scenario file.

    Parameters
    ----------
    s : str

    Returns
    -------
    dict
        Maps section names to ``{key: value}`` dicts.
        A tuple value becomes a Python tuple;
        keys that accumulate map to a list of values.

    Raises
    ------
    Error
        The text cannot be tokenized or does not follow the grammar.
    """
    lexer = iter(ConfigLexer(s))
    try:
        sections = _config(lexer)
    except lex.RunError as exc:
        fstr = ("{0.args[0]}: "
                "(line: {0.lineno}, offset: {0.offset}, text: {0.text})")
        raise Error(fstr.format(exc)) from exc
    return sections


def _config(lexer):
    """Return all sections of a scenario file."""
    sections = {}
    current = None
    while True:
        tok = next(lexer)
        if isinstance(tok, EndToken):
            return sections
        if isinstance(tok, NewlineToken):
            continue
        if isinstance(tok, LBRACK):
            current = _expect_token(lexer, {NameToken}).value
            _expect_token(lexer, {RBRACK})
            _expect_token(lexer, {NewlineToken, EndToken})
            if current in sections:
                fstr = "section [{}] repeated (line: {})"
                raise Error(fstr.format(current, tok.lineno))
            sections[current] = {}
            continue
        if isinstance(tok, NameToken):
            if current is None:
                fstr = "key {!r} outside of a section (line: {})"
                raise Error(fstr.format(tok.value, tok.lineno))
            _expect_token(lexer, {EQUALS})
            value = _value(lexer)
            end = _expect_token(lexer, {NewlineToken, EndToken})
            _store(sections[current], current, tok, value)
            if isinstance(end, EndToken):
                return sections
            continue
        fstr = "unexpected {} {!r} (line: {}, offset: {})"
        raise Error(fstr.format(type(tok).__name__, tok.value, tok.lineno, tok.offset))


def _value(lexer):
    """Return a scalar or a tuple of scalars."""
    items = [_expect_token(lexer, {LiteralToken, NameToken}).value]
    while isinstance(lexer.peek_token(), COMMA):
        next(lexer)
        items.append(_expect_token(lexer, {LiteralToken, NameToken}).value)
    return items[0] if len(items) == 1 else tuple(items)


def _store(section, name, tok, value):
    key = tok.value
    if (name, key) in _ACCUMULATE:
        section.setdefault(key, []).append(value)
    elif key in section:
        fstr = "key {!r} repeated in section [{}] (line: {})"
        raise Error(fstr.format(key, name, tok.lineno))
    else:
        section[key] = value


def config_hash(text):
    """Return the SHA-256 hex digest of a scenario file's text."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _number(section, key, value, integer=False, positive=False):
    ok = isinstance(value, int) if integer else isinstance(value, (int, float))
    if isinstance(value, bool) or not ok:
        kind = "an integer" if integer else "a number"
        raise ConfigError(f"[{section}] {key}: expected {kind}, got {value!r}")
    if positive and value <= 0:
        raise ConfigError(f"[{section}] {key}: expected a positive value, got {value}")
    return value if integer else float(value)


def _choice(section, key, value, choices):
    if value not in choices:
        fstr = "[{}] {}: expected one of {}, got {!r}"
        raise ConfigError(fstr.format(section, key, ", ".join(choices), value))
    return value


def _vector(section, key, value, size=3):
    if not isinstance(value, tuple) or len(value) != size:
        raise ConfigError(f"[{section}] {key}: expected {size} comma-separated numbers")
    return tuple(_number(section, key, v) for v in value)


def _as_tuple(value):
    return value if isinstance(value, tuple) else (value, )


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated scenario.

    Every block is a plain dict of checked values,
    so the scenario runner needs no further validation.
    """
    mode: str
    output: str = "."
    seed: int = 0
    label: str = ""
    schema_version: int = SCHEMA_VERSION
    geometry: dict = field(default_factory=dict)
    basis: str = "sto-3g"
    partition: dict = field(default_factory=dict)
    grid: object = "default"
    grid_scheme: str = "becke"
    manybody: dict = field(default_factory=dict)
    state: dict = field(default_factory=dict)
    time: dict = field(default_factory=dict)
    decoherence: dict = field(default_factory=dict)
    limits: dict = field(default_factory=dict)

    @classmethod
    def from_sections(cls, sections):
        """Return the :class:`ScenarioConfig` of parsed sections.

        Raises
        ------
        ConfigError
            A section, key or value is outside the schema,
            or a block required by the mode is missing.
        """
        for name, keys in sections.items():
            if name not in _SECTIONS:
                raise ConfigError(f"unknown section [{name}]")
            unknown = set(keys) - _SECTIONS[name]
            if unknown:
                raise ConfigError(f"[{name}]: unknown keys {sorted(unknown)}")

        scen = sections.get("scenario")
        if scen is None:
            raise ConfigError("missing section [scenario]")
        if "schema_version" not in scen:
            raise ConfigError("[scenario] schema_version: missing")
        version = scen["schema_version"]
        if version != SCHEMA_VERSION:
            fstr = "[scenario] schema_version: expected {}, got {!r}"
            raise ConfigError(fstr.format(SCHEMA_VERSION, version))
        if "mode" not in scen:
            raise ConfigError("[scenario] mode: missing")
        if isinstance(scen["mode"], tuple):
            raise ConfigError("[scenario] mode: expected exactly one mode")
        mode = _choice("scenario", "mode", scen["mode"], MODES)
        seed = _number("scenario", "seed", scen.get("seed", 0), integer=True)
        if seed < 0:
            raise ConfigError("[scenario] seed: expected >= 0")

        kwargs = dict(
            mode=mode,
            output=str(scen.get("output", ".")),
            seed=seed,
            label=str(scen.get("label", mode)),
        )
        if mode == "limits":
            if "geometry" in sections:
                kwargs["geometry"] = _fragment_geometry(sections["geometry"])
        elif mode == "decoherence":
            if "geometry" in sections:
                kwargs["geometry"] = _vibronic_geometry(sections["geometry"])
        else:
            kwargs["geometry"] = _geometry(sections.get("geometry"), mode)
        preset = kwargs.get("geometry", {}).get("preset")
        if mode in ("dynamics", "naive_demo") and preset == "h_atom":
            raise ConfigError(f"mode {mode} needs two electrons, got preset h_atom")
        if mode == "naive_demo" and preset not in ("h2", "h_pair"):
            raise ConfigError("mode naive_demo needs geometry preset h2 or h_pair")
        basis_sec = sections.get("basis", {})
        state = _state(sections.get("state"), mode)
        default_basis = "sto-3g-p" if state.get("preset") == "1sA_2pzB" else "sto-3g"
        basis = str(basis_sec.get("name", default_basis))
        kwargs["basis"] = _choice("basis", "name", basis, tuple(REGISTRY))
        if state.get("preset") == "1sA_2pzB" and not _has_p(basis):
            fstr = "[state] preset 1sA_2pzB needs a basis with p functions, got {!r}"
            raise ConfigError(fstr.format(basis))
        kwargs["state"] = state
        kwargs["partition"] = _partition(sections.get("partition", {}))
        kwargs["grid"], kwargs["grid_scheme"] = _grid(sections.get("grid", {}))
        kwargs["manybody"] = _manybody(sections.get("manybody", {}),
                                       kwargs.get("geometry", {}))
        kwargs["time"] = _time(sections.get("time", {}))
        if mode == "decoherence":
            kwargs["decoherence"] = _decoherence(sections.get("decoherence", {}), seed)
        elif "decoherence" in sections:
            _log.warning("section [decoherence] is ignored in mode %s", mode)
        if mode == "limits":
            kwargs["limits"] = _limits(sections.get("limits"))
        config = cls(**kwargs)
        _log.info("scenario %r: mode %s, basis %s", config.label, mode, config.basis)
        return config

    @property
    def tier_name(self):
        """Return the grid tier name, or ``custom`` for explicit counts."""
        if isinstance(self.grid, str):
            return self.grid
        return "custom"

    def to_dict(self):
        """Return a JSON-ready summary of the scenario."""
        return {
            "schema_version": self.schema_version,
            "mode": self.mode,
            "label": self.label,
            "seed": self.seed,
            "geometry": dict(self.geometry),
            "basis": self.basis,
            "partition": self.partition,
            "grid": self.grid if isinstance(self.grid, str) else dict(self.grid),
            "grid_scheme": self.grid_scheme,
            "manybody": self.manybody,
            "state": _json_state(self.state),
            "time": self.time,
            "decoherence": self.decoherence,
            "limits": self.limits,
        }


def _json_state(state):
    if "weights" not in state:
        return dict(state)
    return {"weights": {str(i): [w.real, w.imag] for i, w in state["weights"].items()}}


def _has_p(basis):
    return any(shell[0] >= 1 for shells in REGISTRY[basis].values()
               for shell in shells)


def _geometry(sec, mode):
    if sec is None:
        raise ConfigError(f"mode {mode} needs a [geometry] section")
    atoms = sec.get("atom")
    if atoms is not None:
        if "preset" in sec:
            raise ConfigError("[geometry]: give either preset or atom lines, not both")
        items = []
        for i, atom in enumerate(atoms):
            if not isinstance(atom, tuple) or len(atom) != 5:
                fstr = "[geometry] atom {}: expected charge, x, y, z, region"
                raise ConfigError(fstr.format(i))
            charge, x, y, z, region = atom
            if not isinstance(charge, str):
                charge = _number("geometry", "atom", charge, positive=True)
            pos = _vector("geometry", "atom", (x, y, z))
            items.append((charge, pos, str(region)))
        return {"atoms": items}

    preset = _choice("geometry", "preset", sec.get("preset", "h2"), GEOMETRY_PRESETS)
    geom = {"preset": preset}
    if preset in ("h2", "h_pair"):
        R = sec.get("R", sec.get("bond", 1.4))
        geom["R"] = _number("geometry", "R", R, positive=True)
    elif preset == "h2_dimer":
        if "R" not in sec:
            raise ConfigError("[geometry] R: h2_dimer needs the separation R")
        geom["R"] = _number("geometry", "R", sec["R"], positive=True)
        geom["bond"] = _number("geometry", "bond", sec.get("bond", 1.4), positive=True)
        if geom["R"] <= geom["bond"]:
            raise ConfigError("[geometry] R: expected R > bond")
    return geom


def _fragment_geometry(sec):
    """Return a two-region geometry of closed-shell neutral fragments."""
    geom = _geometry(sec, "limits")
    if geom.get("preset") in ("h2", "h_pair", "h_atom"):
        fstr = "[geometry] preset {}: mode limits needs closed-shell fragments"
        raise ConfigError(fstr.format(geom["preset"]))
    if "atoms" in geom:
        charges = {}
        for charge, _, region in geom["atoms"]:
            if isinstance(charge, str):
                charge = SYMBOLS.get(charge)
                if charge is None:
                    raise ConfigError("[geometry] atom: unknown element")
            charges[region] = charges.get(region, 0.0) + charge
        if len(charges) != 2:
            fstr = "[geometry]: mode limits needs exactly two regions, got {}"
            raise ConfigError(fstr.format(len(charges)))
        odd = sorted(r for r, q in charges.items() if round(q) % 2)
        if odd:
            raise ConfigError(f"[geometry]: regions {odd} are not closed-shell")
    return geom


def _vibronic_geometry(sec):
    """Return the geometry of a decoherence run, which is always H2."""
    if set(sec) != {"preset"} or sec["preset"] != "h2":
        raise ConfigError("[geometry]: mode decoherence scans the H2 bond; "
                          "only preset = h2 is allowed, bond lengths go in "
                          "[decoherence]")
    return {"preset": "h2"}


def _state(sec, mode):
    if mode not in ("dynamics", "naive_demo"):
        return {}
    if sec is None:
        default = "1sA_2pzB" if mode == "naive_demo" else None
        if default is None:
            raise ConfigError(f"mode {mode} needs a [state] section")
        return {"preset": default}
    if ("preset" in sec) == ("weights" in sec):
        raise ConfigError("[state]: give exactly one of preset or weights")
    if "preset" in sec:
        preset = _choice("state", "preset", sec["preset"], tuple(STATE_PRESETS))
        if mode == "naive_demo" and preset != "1sA_2pzB":
            raise ConfigError("[state] preset: naive_demo needs 1sA_2pzB")
        return {"preset": preset}
    if mode == "naive_demo":
        raise ConfigError("[state] weights: naive_demo needs a fragment preset")
    # weights = index, amplitude [, index, amplitude ...]
    vals = _as_tuple(sec["weights"])
    if len(vals) % 2:
        raise ConfigError("[state] weights: expected index, amplitude pairs")
    weights = {}
    for idx, amp in zip(vals[0::2], vals[1::2]):
        idx = _number("state", "weights", idx, integer=True)
        if idx < 0 or idx in weights:
            raise ConfigError(f"[state] weights: bad or repeated index {idx}")
        weights[idx] = complex(_number("state", "weights", amp))
    if all(w == 0 for w in weights.values()):
        raise ConfigError("[state] weights: expected a non-zero amplitude")
    return {"weights": weights}


def _partition(sec):
    rule = _choice("partition", "rule", sec.get("rule", "voronoi"), ("voronoi", "plane"))
    part = {"rule": rule}
    if rule == "plane":
        if "normal" in sec:
            part["normal"] = _vector("partition", "normal", sec["normal"])
        if "offset" in sec:
            part["offset"] = _number("partition", "offset", sec["offset"])
    elif "normal" in sec or "offset" in sec:
        raise ConfigError("[partition]: normal and offset need rule = plane")
    return part


def _grid(sec):
    scheme = _choice("grid", "scheme", sec.get("scheme", "becke"), ("becke", "cartesian"))
    counts = {k: v for k, v in sec.items() if k in GridTier._fields}
    name = sec.get("tier", "default")
    _choice("grid", "tier", name, tuple(TIERS))
    if not counts:
        return name, scheme
    grid = {"tier": name}
    for key, value in counts.items():
        if key.startswith("tau"):
            grid[key] = _number("grid", key, value, positive=True)
        else:
            grid[key] = _number("grid", key, value, integer=True, positive=True)
    return grid, scheme


def _manybody(sec, geometry):
    preset = geometry.get("preset")
    default = "cis" if preset == "h2_dimer" else "fullci_2e"
    scheme = _choice("manybody", "scheme", sec.get("scheme", default), SCHEMES)
    if preset == "h2_dimer" and scheme == "fullci_2e":
        raise ConfigError("[manybody] scheme: h2_dimer has 4 electrons, use cis")
    orbitals = sec.get("orbitals", "rhf" if scheme == "cis" else "lowdin")
    orbitals = _choice("manybody", "orbitals", orbitals, ORBITALS)
    if scheme == "cis" and orbitals != "rhf":
        raise ConfigError("[manybody] orbitals: cis needs rhf orbitals")
    coupling = _choice("manybody", "coupling", sec.get("coupling", "singlet"), COUPLINGS)
    return {"scheme": scheme, "orbitals": orbitals, "coupling": coupling}


def _time(sec):
    time = {}
    if "samples" in sec:
        time["samples"] = _number("time", "samples", sec["samples"], integer=True)
        if time["samples"] < 2:
            raise ConfigError("[time] samples: expected >= 2")
    if "t_max" in sec:
        time["t_max"] = _number("time", "t_max", sec["t_max"], positive=True)
    if "periods" in sec:
        time["periods"] = _number("time", "periods", sec["periods"], positive=True)
    return time


def _decoherence(sec, seed):
    params = {"seed": seed}
    for key in ("sigma", "r_eq_g", "nu_g", "r_eq_e", "nu_e", "mass"):
        if key in sec:
            params[key] = _number("decoherence", key, sec[key], positive=(key != "sigma"))
    if params.get("sigma", 0.0) < 0.0:
        raise ConfigError("[decoherence] sigma: expected >= 0")
    for key in ("samples", "seed", "nodes"):
        if key in sec:
            params[key] = _number("decoherence", key, sec[key], integer=True, positive=True)
    params["method"] = _choice("decoherence", "method", sec.get("method", "analytic"),
                               ("analytic", "montecarlo"))
    return params


def _limits(sec):
    if sec is None or "separations" not in sec:
        raise ConfigError("mode limits needs [limits] separations")
    seps = tuple(_number("limits", "separations", s, positive=True)
                 for s in _as_tuple(sec["separations"]))
    return {"separations": seps,
            "bond": _number("limits", "bond", sec.get("bond", 1.4), positive=True)}


def load_config(path):
    """Read, parse and validate a scenario file.

    Returns
    -------
    (ScenarioConfig, str)
        The scenario and the hash of the file's text.

    Raises
    ------
    OSError
        The file cannot be read.
    Error
        The text has a lexical or syntax error.
    ConfigError
        The scenario is invalid.
    """
    with open(path, encoding="utf-8") as fin:
        text = fin.read()
    return ScenarioConfig.from_sections(parse_config(text)), config_hash(text)
