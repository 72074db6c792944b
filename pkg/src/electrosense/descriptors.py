"""Transform-invariant multi-scale shape descriptors and dictionary matching.

The scale-j invariant samples are

    I[j, n] = tau1_j(n dt_j) / sqrt( 2^j / N * sum_n ||N0(n dt_0)||_F^2 )

where tau1_j is the largest singular value of the filtered PT at scale j
and the normalizer always uses the scale-0 series.  Translation and
rotation cancel in the singular values, dilation by s multiplies both
numerator and normalizer by s^2.  The descriptor is the concatenation over
scales (j ascending) of the N per-sample invariants (n ascending).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import BoundaryMesh, Material, load_dictionary_spec, make_shape
from .gpt import PTComputer, PTSeries, filtered_pt_series
from .pulse import Pulse, pulse_bank

ARCHIVE_VERSION = 1


@dataclass(frozen=True)
class ShapeDescriptor:
    scales: tuple
    values: np.ndarray          # concatenated I[j, n], length len(scales) * N
    samples_per_scale: int
    normalizer: float           # (1/N) sum ||N0||_F^2
    fingerprint: str

    def block(self, j: int) -> np.ndarray:
        idx = self.scales.index(j)
        n = self.samples_per_scale
        return self.values[idx * n:(idx + 1) * n]


@dataclass(frozen=True)
class DictionaryEntry:
    name: str
    material: Material
    descriptor: ShapeDescriptor


@dataclass(frozen=True)
class Dictionary:
    entries: tuple
    fingerprint: str
    settings: dict

    def names(self) -> list[str]:
        return [e.name for e in self.entries]

    def __len__(self) -> int:
        return len(self.entries)


def settings_fingerprint(pulse: Pulse, scales, panels: int) -> str:
    """Hash of everything a descriptor comparison must share."""
    fp = hashlib.sha256()
    fp.update(pulse.fingerprint.encode())
    fp.update(np.asarray(sorted(scales), dtype=float).tobytes())
    fp.update(np.asarray([pulse.T, pulse.N, panels, ARCHIVE_VERSION],
                         dtype=float).tobytes())
    return fp.hexdigest()[:16]


def compute_descriptor(series_by_scale: dict[int, PTSeries], scales=None,
                       fingerprint: str = "") -> ShapeDescriptor:
    """Build the invariant vector from per-scale PT series.

    The scale-0 series must be present: it is the normalizer of every scale
    (it need not be part of `scales`).
    """
    if 0 not in series_by_scale:
        raise ValueError("scale-0 series required as the descriptor normalizer")
    if scales is None:
        scales = sorted(series_by_scale)
    base = series_by_scale[0]
    n_samples = base.N
    e0 = float(np.einsum("nij,nij->", base.values, base.values) / n_samples)
    if e0 <= 0.0:
        raise ValueError("degenerate normalizer: scale-0 series has no energy")
    blocks = []
    for j in sorted(scales):
        ser = series_by_scale[j]
        if ser.N != n_samples:
            raise ValueError("all scales must share the sample count")
        tau1 = ser.singular_values()[:, 0]
        blocks.append(tau1 / np.sqrt(2.0**j * e0))
    return ShapeDescriptor(tuple(sorted(scales)), np.concatenate(blocks),
                           n_samples, e0, fingerprint or base.fingerprint)


def descriptor_distance(a: ShapeDescriptor, b: ShapeDescriptor) -> float:
    return float(np.linalg.norm(a.values - b.values))


def verify_compatible(dictionary: Dictionary, pulse: Pulse, scales) -> None:
    """Raise unless descriptors built with this pulse/scales can be matched."""
    s = dictionary.settings
    expected = settings_fingerprint(pulse, scales, s["panels"])
    if expected != dictionary.fingerprint:
        raise ValueError(
            "dictionary fingerprint mismatch: archive was built with "
            f"pulse {s.get('pulse')}, T={s.get('T')}, N={s.get('N')}, "
            f"scales {s.get('scales')}")


def match(descriptor: ShapeDescriptor, dictionary: Dictionary) -> list[tuple[str, float]]:
    """Ranked (name, epsilon) list, ascending distance, dictionary-order ties."""
    if descriptor.fingerprint != dictionary.fingerprint:
        raise ValueError(
            "descriptor fingerprint does not match the dictionary "
            f"({descriptor.fingerprint} vs {dictionary.fingerprint})")
    scored = [(descriptor_distance(descriptor, e.descriptor), i, e.name)
              for i, e in enumerate(dictionary.entries)]
    scored.sort()
    return [(name, eps) for eps, _, name in scored]


def build_dictionary(base_pulse_obj: Pulse, scales, panels: int = 256,
                     spec=None, eta: float | None = None) -> Dictionary:
    """Descriptors of every dictionary shape via the frequency pipeline.

    Always computes the scale-0 series (normalizer) even when 0 is not a
    requested scale.
    """
    entries = []
    spec_entries = load_dictionary_spec(spec) if not isinstance(spec, list) else spec
    pulses = pulse_bank(base_pulse_obj, sorted(set(scales) | {0}))
    fp = settings_fingerprint(base_pulse_obj, scales, panels)
    kwargs = {} if eta is None else {"eta": eta}
    for entry in spec_entries:
        mesh = make_shape(entry["name"], panels)
        material = Material(float(entry["sigma"]), float(entry["eps"]))
        computer = PTComputer(mesh, material)
        series = {j: filtered_pt_series(mesh, material, p, computer=computer,
                                        shape_id=entry["name"], **kwargs)
                  for j, p in pulses.items()}
        desc = compute_descriptor(series, scales, fingerprint=fp)
        entries.append(DictionaryEntry(entry["name"], material, desc))
    settings = {
        "scales": sorted(int(j) for j in scales),
        "panels": int(panels),
        "T": base_pulse_obj.T,
        "N": base_pulse_obj.N,
        "pulse": base_pulse_obj.fingerprint,
    }
    return Dictionary(tuple(entries), fp, settings)


def save_dictionary(dictionary: Dictionary, path) -> None:
    """Deterministic JSON archive (sorted keys, repr-exact floats)."""
    payload = {
        "version": ARCHIVE_VERSION,
        "fingerprint": dictionary.fingerprint,
        "settings": dictionary.settings,
        "entries": [
            {
                "name": e.name,
                "sigma": e.material.sigma,
                "eps": e.material.eps,
                "scales": list(e.descriptor.scales),
                "samples_per_scale": e.descriptor.samples_per_scale,
                "normalizer": e.descriptor.normalizer,
                "descriptor": e.descriptor.values.tolist(),
            }
            for e in dictionary.entries
        ],
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=1))


def load_dictionary(path) -> Dictionary:
    try:
        payload = json.loads(Path(path).read_text())
    except json.JSONDecodeError as err:
        raise ValueError(f"corrupt dictionary archive: {err}") from err
    if payload.get("version") != ARCHIVE_VERSION:
        raise ValueError("unsupported dictionary archive version")
    entries = []
    for e in payload["entries"]:
        desc = ShapeDescriptor(tuple(e["scales"]), np.asarray(e["descriptor"]),
                               e["samples_per_scale"], e["normalizer"],
                               payload["fingerprint"])
        entries.append(DictionaryEntry(e["name"], Material(e["sigma"], e["eps"]),
                                       desc))
    return Dictionary(tuple(entries), payload["fingerprint"], payload["settings"])
