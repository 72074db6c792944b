"""Command-line front end.

Subcommands:
    dict build | dict inspect   build or show a descriptor archive
    simulate                    clean or noisy MSR datasets for one target
    reconstruct                 PT time series from a saved dataset
    identify                    match a (simulated) target against a dictionary
    experiment                  run a plan file (error bars / noise sweep / ablation)

Exit codes: 0 ok, 2 bad input (missing/corrupt files, bad parameters),
3 fingerprint mismatch, 1 anything else.  Human-readable text goes to
stdout; machine consumers read the written files only.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from importlib import resources
from pathlib import Path

import numpy as np

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_BAD_INPUT = 2
EXIT_FINGERPRINT = 3


def thread_count(args) -> int:
    if getattr(args, "threads", 0):
        return args.threads
    return int(os.environ.get("ELECTROSENSE_THREADS", "0")) or 1


def _bundled_plan(name: str) -> str | None:
    ref = resources.files("electrosense").joinpath(f"data/plans/{name}")
    return ref.read_text() if ref.is_file() else None


def _load_plan(path_or_name: str):
    from .experiments import ExperimentPlan
    p = Path(path_or_name)
    if p.exists():
        text = p.read_text()
    else:
        text = _bundled_plan(path_or_name) or _bundled_plan(f"{path_or_name}.json")
        if text is None:
            raise FileNotFoundError(f"plan not found: {path_or_name}")
    payload = json.loads(text)
    if "plan" in payload:   # report manifest: replay its embedded plan
        payload = payload["plan"]
    return ExperimentPlan.from_json(json.dumps(payload))


def _pulse_from_args(args):
    from .pulse import base_pulse
    return base_pulse(args.T, args.samples)


def _scales_from_args(args):
    if args.scales is None:
        return (-1, 0, 1, 2)
    lo, _, hi = args.scales.partition("..")
    if hi:
        return tuple(range(int(lo), int(hi) + 1))
    return tuple(int(x) for x in args.scales.split(","))


def cmd_dict_build(args) -> int:
    from .descriptors import build_dictionary, save_dictionary
    from .geometry import load_dictionary_spec
    spec = load_dictionary_spec(args.spec) if args.spec else None
    scales = _scales_from_args(args)
    base = _pulse_from_args(args)
    dico = build_dictionary(base, scales, args.panels, spec=spec)
    save_dictionary(dico, args.out)
    print(f"wrote {args.out}: {len(dico)} entries, scales {list(scales)}, "
          f"panels {args.panels}, fingerprint {dico.fingerprint}")
    return EXIT_OK


def cmd_dict_inspect(args) -> int:
    from .descriptors import load_dictionary
    dico = load_dictionary(args.archive)
    print(f"fingerprint: {dico.fingerprint}")
    print(f"settings: {json.dumps(dico.settings, sort_keys=True)}")
    for e in dico.entries:
        v = e.descriptor.values
        print(f"  {e.name:10s} sigma={e.material.sigma:g} eps={e.material.eps:g} "
              f"|I|={np.linalg.norm(v):.4f} len={len(v)}")
    return EXIT_OK


def _simulate_target(args, scales):
    from .acquisition import build_array
    from .forward import simulate_msr
    from .geometry import Material, RigidMotion, apply_motion, make_shape
    from .potentials import assemble_neumann_poincare
    from .pulse import pulse_bank
    base = _pulse_from_args(args)
    mesh = make_shape(args.shape, args.panels)
    motion = RigidMotion(np.asarray(args.z), args.dilation, args.rotation)
    mesh = apply_motion(mesh, motion)
    material = Material(args.sigma, args.eps)
    config = build_array(args.radius, args.sources, args.aperture,
                         args.separation, args.z)
    kstar = assemble_neumann_poincare(mesh).matrix
    pulses = pulse_bank(base, sorted(set(scales) | {0}))
    return {j: simulate_msr(mesh, material, config, p, kstar=kstar,
                            substeps=args.substeps)
            for j, p in pulses.items()}, config, base


def cmd_simulate(args) -> int:
    from .forward import add_noise
    scales = _scales_from_args(args)
    datasets, _, _ = _simulate_target(args, scales)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    for j, data in datasets.items():
        if args.noise > 0:
            data = add_noise(data, args.noise, args.seed + (j - min(datasets)))
        data.save(outdir / f"msr_{args.shape}_scale{j}")
    manifest = {
        "shape": args.shape, "scales": sorted(datasets), "noise": args.noise,
        "seed": args.seed, "panels": args.panels, "T": args.T,
        "samples": args.samples, "z": list(args.z), "dilation": args.dilation,
        "rotation": args.rotation, "aperture": args.aperture,
        "radius": args.radius, "sources": args.sources,
        "separation": args.separation,
    }
    (outdir / "manifest.json").write_text(json.dumps(manifest, sort_keys=True,
                                                     indent=1))
    print(f"wrote {len(datasets)} datasets to {outdir}")
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    from .acquisition import build_forward_operator
    from .forward import load_msr
    from .inversion import export_reconstruction_csv, reconstruct_pt
    data = load_msr(args.data)
    operator = build_forward_operator(data.config)
    result = reconstruct_pt(data, operator)
    export_reconstruction_csv(result, args.out)
    print(f"wrote {args.out} (cond L = {result.condition_number:.3g}, "
          f"median residual = {np.median(result.residuals):.3g})")
    return EXIT_OK


def cmd_identify(args) -> int:
    from .acquisition import build_forward_operator
    from .descriptors import (compute_descriptor, load_dictionary, match,
                              verify_compatible)
    from .forward import add_noise
    from .inversion import reconstruct_pt
    dico = load_dictionary(args.dictionary)
    scales = tuple(dico.settings["scales"])
    datasets, config, base = _simulate_target(args, scales)
    verify_compatible(dico, base, scales)
    operator = build_forward_operator(config)
    series = {}
    for j, data in datasets.items():
        if args.noise > 0:
            data = add_noise(data, args.noise, args.seed + (j - min(datasets)))
        series[j] = reconstruct_pt(data, operator).series
    desc = compute_descriptor(series, scales, fingerprint=dico.fingerprint)
    ranked = match(desc, dico)
    print(f"target: {args.shape} (noise {args.noise:g}, seed {args.seed})")
    for name, eps in ranked:
        print(f"  {name:10s} eps = {eps:.6f}")
    print(f"identified: {ranked[0][0]}")
    if args.out:
        rows = ["rank,name,eps"] + [f"{i},{n},{e:.17g}"
                                    for i, (n, e) in enumerate(ranked)]
        Path(args.out).write_text("\n".join(rows) + "\n")
    return EXIT_OK


def cmd_experiment(args) -> int:
    from .experiments import (run_identification, run_scale_ablation,
                              write_report)
    plan = _load_plan(args.plan)
    if args.trials:
        from dataclasses import replace
        plan = replace(plan, trials=args.trials)
    progress = (lambda msg: print(f"  [{plan.name}] {msg}", flush=True)) \
        if args.verbose else None
    if args.ablation:
        reports = run_scale_ablation(plan, progress=progress)
        written = {}
        for scales, report in reports.items():
            tag = "m".join(str(abs(j)) if j < 0 else str(j) for j in scales)
            written = write_report(report, args.out, f"{plan.name}_scales_{tag}")
        print(f"wrote ablation reports to {args.out}")
    else:
        report = run_identification(plan, progress=progress)
        written = write_report(report, args.out, plan.name)
        print(f"wrote {written['csv']}")
        worst = min(report.rows, key=lambda r: r["success_prob"])
        print(f"worst cell: {worst['shape']} at rho={worst['noise']:g} "
              f"-> success {worst['success_prob']:.3f}")
    return EXIT_OK


def cmd_pulse_export(args) -> int:
    from .pulse import dilate
    base = _pulse_from_args(args)
    p = dilate(base, args.scale)
    rows = ["t,h"] + [f"{t:.17g},{v:.17g}" for t, v in zip(p.times, p.samples)]
    Path(args.out).write_text("\n".join(rows) + "\n")
    print(f"wrote {args.out}")
    return EXIT_OK


def _add_pulse_args(p):
    p.add_argument("--T", type=float, default=5.0, help="base window length")
    p.add_argument("--samples", type=int, default=512,
                   help="time samples per scale (N)")


def _add_target_args(p):
    p.add_argument("--shape", required=True)
    p.add_argument("--sigma", type=float, default=10.0)
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--panels", type=int, default=512)
    p.add_argument("--z", type=float, nargs=2, default=(0.1, 0.1))
    p.add_argument("--dilation", type=float, default=1.5)
    p.add_argument("--rotation", type=float, default=np.pi / 3)
    p.add_argument("--aperture", type=float, default=np.pi / 16)
    p.add_argument("--radius", type=float, default=10.7)
    p.add_argument("--sources", type=int, default=50)
    p.add_argument("--separation", type=float, default=0.1)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--substeps", type=int, default=2,
                   help="time-march refinement (output stays on the N grid)")
    p.add_argument("--scales", default=None,
                   help="jmin..jmax or comma list (default -1..2)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="electrosense",
        description="Pulse-type electro-sensing: simulate, reconstruct, identify.")
    ap.add_argument("--threads", type=int, default=0,
                    help="worker cap (or ELECTROSENSE_THREADS)")
    sub = ap.add_subparsers(dest="command", required=True)

    d = sub.add_parser("dict", help="descriptor dictionary archives")
    dsub = d.add_subparsers(dest="dict_command", required=True)
    db = dsub.add_parser("build")
    db.add_argument("--spec", default=None, help="dictionary definition JSON")
    db.add_argument("--panels", type=int, default=256)
    db.add_argument("--scales", default=None)
    db.add_argument("--out", default="dictionary.json")
    _add_pulse_args(db)
    db.set_defaults(func=cmd_dict_build)
    di = dsub.add_parser("inspect")
    di.add_argument("archive")
    di.set_defaults(func=cmd_dict_inspect)

    s = sub.add_parser("simulate", help="simulate MSR datasets")
    _add_target_args(s)
    _add_pulse_args(s)
    s.add_argument("--out", default="msr_out")
    s.set_defaults(func=cmd_simulate)

    r = sub.add_parser("reconstruct", help="reconstruct PT series from a dataset")
    r.add_argument("data", help="dataset stem (without .json/.npy)")
    r.add_argument("--out", default="reconstruction.csv")
    r.set_defaults(func=cmd_reconstruct)

    i = sub.add_parser("identify", help="simulate a target and match it")
    i.add_argument("--dictionary", required=True)
    _add_target_args(i)
    _add_pulse_args(i)
    i.add_argument("--out", default=None)
    i.set_defaults(func=cmd_identify)

    e = sub.add_parser("experiment", help="run an experiment plan")
    e.add_argument("plan", help="plan file path or bundled plan name")
    e.add_argument("--out", default="reports")
    e.add_argument("--trials", type=int, default=0, help="override plan trials")
    e.add_argument("--ablation", action="store_true",
                   help="also run reduced scale sets")
    e.add_argument("--verbose", action="store_true")
    e.set_defaults(func=cmd_experiment)

    pe = sub.add_parser("pulse", help="export pulse samples as CSV")
    pe.add_argument("--scale", type=int, default=0)
    pe.add_argument("--out", default="pulse.csv")
    _add_pulse_args(pe)
    pe.set_defaults(func=cmd_pulse_export)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    os.environ.setdefault("ELECTROSENSE_THREADS", str(thread_count(args)))
    try:
        return args.func(args)
    except (FileNotFoundError, json.JSONDecodeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except ValueError as err:
        msg = str(err)
        print(f"error: {msg}", file=sys.stderr)
        if "fingerprint" in msg:
            return EXIT_FINGERPRINT
        return EXIT_BAD_INPUT
    except Exception as err:  # pragma: no cover - defensive
        print(f"error: {err}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
