"""Scenario and domain types shared across the toolkit.

Units are SI throughout: meters, Hz, seconds, rad/m. All types are value
data; treat them as read-only after construction so they can be shared
freely across parallel workers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

SPEED_OF_LIGHT = 3.0e8  # m/s, vacuum

SCENARIO_KEYS = (
    "terminals",
    "targets",
    "f0_hz",
    "bandwidth_hz",
    "noise_power",
    "sync_errors_s",
    "pairing",
    "seed",
)


class SchemaError(ValueError):
    """Scenario document does not match the documented JSON schema.

    ``path`` names the offending field, e.g. ``terminals[1].rx_elements``.
    """

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


@dataclass(frozen=True)
class Vec2:
    """2D point or vector: meters for positions, rad/m for wavenumbers."""

    x: float
    y: float

    def __array__(self, dtype=None, copy=None):
        return np.array([self.x, self.y], dtype=dtype or float)

    def __add__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x - other.x, self.y - other.y)

    def __mul__(self, s: float) -> "Vec2":
        return Vec2(self.x * s, self.y * s)

    __rmul__ = __mul__

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def is_finite(self) -> bool:
        return math.isfinite(self.x) and math.isfinite(self.y)


def distance(a: Vec2, b: Vec2) -> float:
    """Euclidean distance in meters."""
    return math.hypot(b.x - a.x, b.y - a.y)


@dataclass(frozen=True)
class Terminal:
    """A sensing terminal: a phase center plus its Tx/Rx element positions.

    Elements can represent a physical array or sampled positions of a
    synthetic aperture; the toolkit does not distinguish the two.
    """

    id: int
    phase_center: Vec2
    tx_elements: tuple[Vec2, ...] = ()
    rx_elements: tuple[Vec2, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "tx_elements", tuple(self.tx_elements))
        object.__setattr__(self, "rx_elements", tuple(self.rx_elements))


@dataclass(frozen=True)
class PointTarget:
    """Isotropic point scatterer with complex reflectivity."""

    position: Vec2
    reflectivity: complex = 1.0 + 0.0j

    def __post_init__(self):
        object.__setattr__(self, "reflectivity", complex(self.reflectivity))


@dataclass(frozen=True, eq=False)
class AssociationMatrix:
    """Binary L-by-L matrix gating which Tx terminal / Rx terminal pairs
    take part in a simulation. Entry (l, k) = 1 pairs Tx terminal l with
    Rx terminal k; the diagonal holds the monostatic acquisitions.
    """

    entries: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "entries", np.asarray(self.entries, dtype=int)
        )

    @classmethod
    def identity(cls, n_terminals: int) -> "AssociationMatrix":
        """Monostatic-only pairing (the no-cooperation baseline)."""
        return cls(np.eye(n_terminals, dtype=int))

    @classmethod
    def full(cls, n_terminals: int) -> "AssociationMatrix":
        """All terminals transmit and receive: up to L^2 pairs."""
        return cls(np.ones((n_terminals, n_terminals), dtype=int))

    def is_active(self, tx: int, rx: int) -> bool:
        return bool(self.entries[tx, rx])

    def active_pairs(self) -> list[tuple[int, int]]:
        """Active (tx, rx) pairs in row-major order."""
        rows, cols = np.nonzero(self.entries)
        return list(zip(rows.tolist(), cols.tolist()))

    def __eq__(self, other) -> bool:
        if not isinstance(other, AssociationMatrix):
            return NotImplemented
        return np.array_equal(self.entries, other.entries)


@dataclass(frozen=True)
class ImageGrid:
    """Uniform 2D pixel grid. ``origin`` is the center of pixel (0, 0),
    ``spacing`` is (dx, dy) in meters and ``size`` is (nx, ny) pixels.
    Pixel arrays are indexed [ix, iy].
    """

    origin: Vec2
    spacing: tuple[float, float]
    size: tuple[int, int]

    def __post_init__(self):
        object.__setattr__(self, "spacing", tuple(float(s) for s in self.spacing))
        object.__setattr__(self, "size", tuple(int(n) for n in self.size))
        dx, dy = self.spacing
        nx, ny = self.size
        if dx <= 0 or dy <= 0:
            raise ValueError("grid spacing must be positive")
        if nx < 1 or ny < 1:
            raise ValueError("grid size must be at least 1x1")

    @property
    def x_coords(self) -> np.ndarray:
        return self.origin.x + self.spacing[0] * np.arange(self.size[0])

    @property
    def y_coords(self) -> np.ndarray:
        return self.origin.y + self.spacing[1] * np.arange(self.size[1])

    def pixel_coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Meshgrid of pixel centers, each array shaped (nx, ny)."""
        return np.meshgrid(self.x_coords, self.y_coords, indexing="ij")

    def nearest_pixel(self, point: Vec2) -> tuple[int, int]:
        i = int(round((point.x - self.origin.x) / self.spacing[0]))
        j = int(round((point.y - self.origin.y) / self.spacing[1]))
        return (min(max(i, 0), self.size[0] - 1), min(max(j, 0), self.size[1] - 1))


@dataclass(frozen=True, eq=False)
class Scenario:
    """Complete description of one networked sensing experiment.

    ``sync_errors`` holds the residual clock error in seconds between each
    Tx terminal l and Rx terminal k; it is honored by the simulator and
    never compensated downstream. ``rng_seed`` makes every noisy run
    reproducible.
    """

    terminals: tuple[Terminal, ...]
    targets: tuple[PointTarget, ...]
    f0: float
    bandwidth: float
    noise_power: float = 0.0
    sync_errors: np.ndarray | None = None
    pairing: AssociationMatrix | None = None
    rng_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "terminals", tuple(self.terminals))
        object.__setattr__(self, "targets", tuple(self.targets))
        n = len(self.terminals)
        if self.sync_errors is None:
            object.__setattr__(self, "sync_errors", np.zeros((n, n)))
        else:
            object.__setattr__(
                self, "sync_errors", np.asarray(self.sync_errors, dtype=float)
            )
        if self.pairing is None:
            object.__setattr__(self, "pairing", AssociationMatrix.identity(n))

    @property
    def n_terminals(self) -> int:
        return len(self.terminals)

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.f0

    def __eq__(self, other) -> bool:
        if not isinstance(other, Scenario):
            return NotImplemented
        return (
            self.terminals == other.terminals
            and self.targets == other.targets
            and self.f0 == other.f0
            and self.bandwidth == other.bandwidth
            and self.noise_power == other.noise_power
            and np.array_equal(self.sync_errors, other.sync_errors)
            and self.pairing == other.pairing
            and self.rng_seed == other.rng_seed
        )


def validate(scenario: Scenario) -> list[str]:
    """Check every scenario invariant and return the violations found.

    Total by design: never raises on any constructible Scenario, so that
    callers can report problems as data.
    """
    v: list[str] = []
    n = scenario.n_terminals

    if n == 0:
        v.append("scenario has no terminals")
    for idx, term in enumerate(scenario.terminals):
        if term.id != idx:
            v.append(f"terminal ids must be 0..L-1 in list order (got id {term.id} at index {idx})")
        if not term.tx_elements and not term.rx_elements:
            v.append(f"terminal {term.id}: at least one element list must be non-empty")
        for name, elements in (("tx", term.tx_elements), ("rx", term.rx_elements)):
            for e, el in enumerate(elements):
                if not el.is_finite():
                    v.append(f"terminal {term.id}: {name} element {e} is not finite")
        if not term.phase_center.is_finite():
            v.append(f"terminal {term.id}: phase center is not finite")

    for t, target in enumerate(scenario.targets):
        if not target.position.is_finite():
            v.append(f"target {t}: position is not finite")
        if not abs(target.reflectivity) > 0:
            v.append(f"target {t}: reflectivity magnitude must be positive")

    if not scenario.bandwidth > 0:
        v.append("bandwidth must be positive")
    elif not scenario.f0 > scenario.bandwidth / 2:
        v.append("carrier f0 must exceed bandwidth/2")
    if scenario.noise_power < 0:
        v.append("noise power must be non-negative")

    if scenario.sync_errors.shape != (n, n):
        v.append(f"sync_errors must be {n}x{n}, got {scenario.sync_errors.shape}")
    if scenario.pairing.entries.shape != (n, n):
        v.append(f"pairing must be {n}x{n}, got {scenario.pairing.entries.shape}")
    else:
        bad = set(np.unique(scenario.pairing.entries)) - {0, 1}
        if bad:
            v.append(f"pairing entries must be 0 or 1, got {sorted(bad)}")
        pairs = scenario.pairing.active_pairs()
        if not pairs:
            v.append("no active pair")
        for l, k in pairs:
            if l < n and not scenario.terminals[l].tx_elements:
                v.append(f"pair ({l},{k}) active but terminal {l} has no tx elements")
            if k < n and not scenario.terminals[k].rx_elements:
                v.append(f"pair ({l},{k}) active but terminal {k} has no rx elements")

    return v


# --- JSON scenario schema ---------------------------------------------------
#
# {
#   "terminals": [
#     {"id": 0, "phase_center": [x, y],
#      "tx_elements": [[x, y], ...], "rx_elements": [[x, y], ...]}
#   ],
#   "targets": [{"position": [x, y], "reflectivity": [re, im]}],
#   "f0_hz": 28e9,
#   "bandwidth_hz": 500e6,
#   "noise_power": 0.0,           optional, default 0
#   "sync_errors_s": [[...], ...] optional, default all-zero LxL
#   "pairing": [[...], ...]       optional, default identity (monostatic)
#   "seed": 0                     optional, default 0
# }
#
# "reflectivity" also accepts a plain number (zero imaginary part); "id"
# defaults to the list index and "phase_center" to the element centroid.


def _require_number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError("expected a number", path)
    return float(value)


def _require_vec2(value, path: str) -> Vec2:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise SchemaError("expected a [x, y] pair", path)
    return Vec2(_require_number(value[0], f"{path}[0]"), _require_number(value[1], f"{path}[1]"))

def _require_matrix(value, n: int, path: str) -> np.ndarray:
    if not isinstance(value, list) or len(value) != n:
        raise SchemaError(f"expected a {n}x{n} matrix", path)
    rows = []
    for i, row in enumerate(value):
        if not isinstance(row, list) or len(row) != n:
            raise SchemaError(f"expected a row of {n} numbers", f"{path}[{i}]")
        rows.append([_require_number(x, f"{path}[{i}][{j}]") for j, x in enumerate(row)])
    return np.asarray(rows)


def _parse_terminal(doc, index: int) -> Terminal:
    path = f"terminals[{index}]"
    if not isinstance(doc, dict):
        raise SchemaError("expected an object", path)
    term_id = doc.get("id", index)
    if isinstance(term_id, bool) or not isinstance(term_id, int):
        raise SchemaError("expected an integer", f"{path}.id")
    tx = tuple(
        _require_vec2(e, f"{path}.tx_elements[{i}]")
        for i, e in enumerate(doc.get("tx_elements", []))
    )
    rx = tuple(
        _require_vec2(e, f"{path}.rx_elements[{i}]")
        for i, e in enumerate(doc.get("rx_elements", []))
    )
    if "phase_center" in doc:
        center = _require_vec2(doc["phase_center"], f"{path}.phase_center")
    else:
        allel = tx + rx
        if not allel:
            raise SchemaError("terminal has no elements and no phase_center", path)
        center = Vec2(
            sum(e.x for e in allel) / len(allel),
            sum(e.y for e in allel) / len(allel),
        )
    return Terminal(id=term_id, phase_center=center, tx_elements=tx, rx_elements=rx)


def _parse_target(doc, index: int) -> PointTarget:
    path = f"targets[{index}]"
    if not isinstance(doc, dict):
        raise SchemaError("expected an object", path)
    if "position" not in doc:
        raise SchemaError("missing required field", f"{path}.position")
    pos = _require_vec2(doc["position"], f"{path}.position")
    refl = doc.get("reflectivity", 1.0)
    if isinstance(refl, (list, tuple)):
        if len(refl) != 2:
            raise SchemaError("expected [re, im]", f"{path}.reflectivity")
        refl = complex(
            _require_number(refl[0], f"{path}.reflectivity[0]"),
            _require_number(refl[1], f"{path}.reflectivity[1]"),
        )
    else:
        refl = complex(_require_number(refl, f"{path}.reflectivity"), 0.0)
    return PointTarget(position=pos, reflectivity=refl)


def load_scenario(text: str) -> Scenario:
    """Parse a JSON scenario document, filling documented defaults.

    Raises SchemaError naming the offending field (or the JSON parse
    position) on any malformed input.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise SchemaError(f"invalid JSON at line {err.lineno}, column {err.colno}: {err.msg}") from err
    if not isinstance(doc, dict):
        raise SchemaError("top-level document must be an object")

    for key in doc:
        if key not in SCENARIO_KEYS:
            raise SchemaError(f"unknown key (expected one of {', '.join(SCENARIO_KEYS)})", key)
    for key in ("terminals", "targets", "f0_hz", "bandwidth_hz"):
        if key not in doc:
            raise SchemaError("missing required field", key)
    if not isinstance(doc["terminals"], list) or not doc["terminals"]:
        raise SchemaError("expected a non-empty list", "terminals")
    if not isinstance(doc["targets"], list):
        raise SchemaError("expected a list", "targets")

    terminals = tuple(_parse_terminal(t, i) for i, t in enumerate(doc["terminals"]))
    targets = tuple(_parse_target(t, i) for i, t in enumerate(doc["targets"]))
    n = len(terminals)

    f0 = _require_number(doc["f0_hz"], "f0_hz")
    bandwidth = _require_number(doc["bandwidth_hz"], "bandwidth_hz")
    noise_power = _require_number(doc.get("noise_power", 0.0), "noise_power")
    sync = (
        _require_matrix(doc["sync_errors_s"], n, "sync_errors_s")
        if "sync_errors_s" in doc
        else np.zeros((n, n))
    )
    pairing = (
        AssociationMatrix(_require_matrix(doc["pairing"], n, "pairing").astype(int))
        if "pairing" in doc
        else AssociationMatrix.identity(n)
    )
    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise SchemaError("expected an integer", "seed")

    return Scenario(
        terminals=terminals,
        targets=targets,
        f0=f0,
        bandwidth=bandwidth,
        noise_power=noise_power,
        sync_errors=sync,
        pairing=pairing,
        rng_seed=seed,
    )


def scenario_to_json(scenario: Scenario, indent: int | None = 2) -> str:
    """Serialize a scenario to the JSON schema consumed by load_scenario.

    Floats are written exactly (shortest round-trip repr) so that
    serialize -> load -> serialize is stable.
    """
    doc = {
        "terminals": [
            {
                "id": t.id,
                "phase_center": [t.phase_center.x, t.phase_center.y],
                "tx_elements": [[e.x, e.y] for e in t.tx_elements],
                "rx_elements": [[e.x, e.y] for e in t.rx_elements],
            }
            for t in scenario.terminals
        ],
        "targets": [
            {
                "position": [t.position.x, t.position.y],
                "reflectivity": [t.reflectivity.real, t.reflectivity.imag],
            }
            for t in scenario.targets
        ],
        "f0_hz": scenario.f0,
        "bandwidth_hz": scenario.bandwidth,
        "noise_power": scenario.noise_power,
        "sync_errors_s": scenario.sync_errors.tolist(),
        "pairing": scenario.pairing.entries.tolist(),
        "seed": scenario.rng_seed,
    }
    return json.dumps(doc, indent=indent)
