"""Reproducible identification experiments: error bars, noise sweeps, ablations.

A plan pins everything an experiment needs (dictionary settings, target
transform, acquisition, noise grid, trial count, seeds).  Clean MSR data is
simulated once per (shape, scale); Monte Carlo trials only draw fresh noise,
so runs are cheap and the clean physics is shared across noise levels.

Trial seeds are seed_base XOR a stable hash of (shape, noise level, trial),
which decorrelates the noise realizations across shapes and levels while
keeping every run bit-reproducible from the plan alone.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .acquisition import build_array, build_forward_operator
from .descriptors import (Dictionary, build_dictionary, compute_descriptor,
                          match, verify_compatible)
from .forward import add_noise, simulate_msr
from .geometry import Material, RigidMotion, apply_motion, make_shape
from .gpt import PTSeries
from .inversion import reconstruct_pt
from .potentials import assemble_neumann_poincare
from .pulse import DEFAULT_N, DEFAULT_SCALES, DEFAULT_T, base_pulse, pulse_bank

RANDOM_GUESS = 1.0 / 8.0


@dataclass(frozen=True)
class ExperimentPlan:
    name: str = "experiment"
    shapes: tuple = ()                    # () = every dictionary entry
    noise_levels: tuple = (1.0,)
    trials: int = 100
    scales: tuple = DEFAULT_SCALES
    aperture: float = np.pi / 16.0
    radius: float = 10.7
    n_sources: int = 50
    separation: float = 0.1
    translation: tuple = (0.1, 0.1)
    dilation: float = 1.5
    rotation: float = np.pi / 3.0
    seed_base: int = 0
    T: float = DEFAULT_T
    samples: int = DEFAULT_N
    dict_panels: int = 256
    sim_panels: int = 512
    sim_substeps: int = 2   # marching refinement; data stays on the N grid

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if any(r < 0 for r in self.noise_levels):
            raise ValueError("noise levels must be >= 0")

    def resolved_shapes(self, dictionary: Dictionary) -> tuple:
        return tuple(self.shapes) if self.shapes else tuple(dictionary.names())

    def to_json(self) -> str:
        d = asdict(self)
        d["shapes"] = list(self.shapes)
        d["noise_levels"] = [float(x) for x in self.noise_levels]
        d["scales"] = [int(j) for j in self.scales]
        d["translation"] = [float(x) for x in self.translation]
        return json.dumps(d, sort_keys=True, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentPlan":
        d = json.loads(text)
        for k in ("shapes", "noise_levels", "scales", "translation"):
            if k in d:
                d[k] = tuple(d[k])
        return cls(**d)


@dataclass
class ExperimentReport:
    plan: ExperimentPlan
    dictionary_names: list
    rows: list = field(default_factory=list)
    # each row: {shape, noise, scales, success_prob, mean_eps: {name: float}}
    runtime_seconds: float = 0.0

    def success(self, shape: str, noise: float) -> float:
        for r in self.rows:
            if r["shape"] == shape and r["noise"] == noise:
                return r["success_prob"]
        raise KeyError((shape, noise))

    def to_csv(self) -> str:
        header = (["shape", "noise", "aperture", "scales", "success_prob"]
                  + [f"mean_eps_{n}" for n in self.dictionary_names])
        lines = [",".join(header)]
        for r in self.rows:
            cells = [r["shape"], f"{r['noise']:.17g}",
                     f"{self.plan.aperture:.17g}",
                     ";".join(str(j) for j in r["scales"]),
                     f"{r['success_prob']:.17g}"]
            cells += [f"{r['mean_eps'][n]:.17g}" for n in self.dictionary_names]
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"


def trial_seed(seed_base: int, shape: str, noise: float, trial: int) -> int:
    """Stable 63-bit seed decorrelating (shape, level, trial) streams."""
    digest = hashlib.sha256(
        f"{shape}|{noise:.12g}|{trial}".encode()).digest()
    return (seed_base ^ int.from_bytes(digest[:8], "big")) & (2**63 - 1)


class ExperimentRunner:
    """Shares the dictionary and clean simulations across runs of one plan."""

    def __init__(self, plan: ExperimentPlan, dictionary: Dictionary | None = None,
                 progress=None):
        self.plan = plan
        self.progress = progress or (lambda msg: None)
        self.base = base_pulse(plan.T, plan.samples)
        scale_set = sorted(set(plan.scales) | {0})
        self.pulses = pulse_bank(self.base, scale_set)
        if dictionary is None:
            self.progress("building dictionary")
            dictionary = build_dictionary(self.base, plan.scales, plan.dict_panels)
        verify_compatible(dictionary, self.base, plan.scales)
        self.dictionary = dictionary
        self.config = build_array(plan.radius, plan.n_sources, plan.aperture,
                                  plan.separation, plan.translation)
        self.operator = build_forward_operator(self.config)
        self.motion = RigidMotion(np.asarray(plan.translation), plan.dilation,
                                  plan.rotation)
        self._materials = {e.name: e.material for e in dictionary.entries}
        self._clean = {}

    def clean_data(self, shape: str) -> dict[int, object]:
        """Clean MSR datasets per scale for one transformed target (cached)."""
        if shape not in self._clean:
            self.progress(f"simulating {shape}")
            mesh = apply_motion(make_shape(shape, self.plan.sim_panels), self.motion)
            kstar = assemble_neumann_poincare(mesh).matrix
            material = self._materials[shape]
            self._clean[shape] = {
                j: simulate_msr(mesh, material, self.config, p, kstar=kstar,
                                substeps=self.plan.sim_substeps)
                for j, p in self.pulses.items()}
        return self._clean[shape]

    def run_trial(self, shape: str, noise: float, trial: int):
        """One identification: add noise, reconstruct, match. Returns ranked list."""
        clean = self.clean_data(shape)
        series = {}
        for j, data in clean.items():
            if noise > 0:
                seed = trial_seed(self.plan.seed_base, shape, noise, trial)
                # one seed per trial; scale index offsets the stream
                data = add_noise(data, noise, seed + (j - min(clean)))
            series[j] = reconstruct_pt(data, self.operator).series
        desc = compute_descriptor(series, self.plan.scales,
                                  fingerprint=self.dictionary.fingerprint)
        return match(desc, self.dictionary)

    def run(self, noise_levels=None, scales=None) -> ExperimentReport:
        plan = self.plan
        levels = plan.noise_levels if noise_levels is None else tuple(noise_levels)
        scales = plan.scales if scales is None else tuple(scales)
        names = self.dictionary.names()
        report = ExperimentReport(plan, names)
        started = time.time()
        for shape in plan.resolved_shapes(self.dictionary):
            clean = self.clean_data(shape)
            for noise in levels:
                eps_sum = {n: 0.0 for n in names}
                hits = 0
                trials = 1 if noise == 0 else plan.trials
                for trial in range(trials):
                    series = {}
                    for j, data in clean.items():
                        if noise > 0:
                            seed = trial_seed(plan.seed_base, shape, noise, trial)
                            data = add_noise(data, noise, seed + (j - min(clean)))
                        series[j] = reconstruct_pt(data, self.operator).series
                    desc = compute_descriptor(series, scales,
                                              fingerprint=self.dictionary.fingerprint)
                    ranked = match(desc, self.dictionary)
                    # ties count as failure: require a strict unique argmin
                    best, second = ranked[0], ranked[1]
                    if best[0] == shape and best[1] < second[1]:
                        hits += 1
                    for name, eps in ranked:
                        eps_sum[name] += eps
                report.rows.append({
                    "shape": shape, "noise": float(noise),
                    "scales": [int(j) for j in sorted(scales)],
                    "success_prob": hits / trials,
                    "mean_eps": {n: eps_sum[n] / trials for n in names},
                })
                self.progress(f"{shape} rho={noise}: {hits}/{trials}")
        report.runtime_seconds = time.time() - started
        return report


def run_identification(plan: ExperimentPlan,
                       dictionary: Dictionary | None = None,
                       progress=None) -> ExperimentReport:
    """Identification error bars over the plan's noise levels."""
    return ExperimentRunner(plan, dictionary, progress).run()


def run_noise_sweep(plan: ExperimentPlan,
                    dictionary: Dictionary | None = None,
                    progress=None) -> ExperimentReport:
    """Success-probability curves over a noise grid (>= 2 levels)."""
    if len(plan.noise_levels) < 2:
        raise ValueError("noise sweep needs at least two levels")
    report = ExperimentRunner(plan, dictionary, progress).run()
    for row in report.rows:
        row["random_guess"] = RANDOM_GUESS
    return report


def run_scale_ablation(plan: ExperimentPlan, scale_sets=((-1,), (-1, 0)),
                       dictionary: Dictionary | None = None,
                       progress=None) -> dict[tuple, ExperimentReport]:
    """Rerun the plan restricted to reduced scale sets.

    The scale-0 data is always acquired (descriptor normalizer) and each
    reduced dictionary is rebuilt over the same base pulse, so reports are
    column-compatible across ablations.
    """
    runner = ExperimentRunner(plan, dictionary, progress)
    out = {tuple(plan.scales): runner.run()}
    for subset in scale_sets:
        sub_dict = build_dictionary(runner.base, subset, plan.dict_panels)
        sub_runner = ExperimentRunner(
            ExperimentPlan(**{**_plan_dict(plan), "scales": tuple(subset)}),
            sub_dict, progress)
        sub_runner._clean = runner._clean   # reuse simulations
        sub_runner.pulses = runner.pulses
        out[tuple(subset)] = sub_runner.run()
    return out


def _plan_dict(plan: ExperimentPlan) -> dict:
    d = asdict(plan)
    d["shapes"] = tuple(plan.shapes)
    d["noise_levels"] = tuple(plan.noise_levels)
    d["scales"] = tuple(plan.scales)
    d["translation"] = tuple(plan.translation)
    return d


def write_report(report: ExperimentReport, outdir, stem: str) -> dict:
    """Write <stem>.csv, <stem>.manifest.json, <stem>.runtime.json.

    CSV and manifest are byte-deterministic replay contracts; the runtime
    sidecar holds wall-clock metadata and is excluded from reproducibility.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    csv_path = outdir / f"{stem}.csv"
    csv_path.write_text(report.to_csv())
    manifest = {
        "plan": json.loads(report.plan.to_json()),
        "dictionary_names": report.dictionary_names,
        "format": 1,
    }
    manifest_path = outdir / f"{stem}.manifest.json"
    manifest_path.write_text(json.dumps(manifest, sort_keys=True, indent=1))
    runtime_path = outdir / f"{stem}.runtime.json"
    runtime_path.write_text(json.dumps(
        {"runtime_seconds": report.runtime_seconds}, sort_keys=True))
    return {"csv": csv_path, "manifest": manifest_path, "runtime": runtime_path}


def replay_manifest(path) -> ExperimentReport:
    """Re-run an experiment from its manifest; output is bit-identical."""
    manifest = json.loads(Path(path).read_text())
    plan = ExperimentPlan.from_json(json.dumps(manifest["plan"]))
    return run_identification(plan)
