"""Batch command-line interface.

Four subcommands: ``attenuation`` and ``snr`` emit plot-ready sweep CSVs,
``fit`` runs the hybrid PCA/ANN pipeline end to end, ``predict`` applies a
saved model to new observations. Every invocation writes a small manifest
next to its outputs. Exit codes: 0 success, 1 data/model error, 2 usage
error. Plots are not rendered here; the CSVs carry everything needed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

from . import atmos, dataset, link, metrics, mlp, pca, pipeline

OUT_DIR_ENV = "FSOQOS_OUT_DIR"

try:
    TOOL_VERSION = version("fsoqos")
except PackageNotFoundError:  # running from a source tree
    TOOL_VERSION = "0.1.0"


class UsageError(Exception):
    """Bad flags or malformed configuration; maps to exit code 2."""


@dataclass
class RunManifest:
    command: str
    config_paths: list
    seeds: list            # [name, value] pairs
    output_dir: str
    tool_version: str

    def write(self, directory: Path, name: str = "manifest.json") -> None:
        doc = {
            "command": self.command,
            "config_paths": self.config_paths,
            "seeds": self.seeds,
            "output_dir": self.output_dir,
            "tool_version": self.tool_version,
        }
        (directory / name).write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")


def _resolve_out(flag_value, default_name: str) -> Path:
    if flag_value:
        return Path(flag_value)
    env_dir = os.environ.get(OUT_DIR_ENV)
    if env_dir:
        return Path(env_dir) / default_name
    raise UsageError(f"--out is required (or set {OUT_DIR_ENV})")


def _parse_float_list(text: str, flag: str):
    try:
        values = [float(part) for part in text.split(",") if part.strip() != ""]
    except ValueError:
        raise UsageError(f"{flag} expects comma-separated numbers, got {text!r}") from None
    if not values:
        raise UsageError(f"{flag} expects at least one value")
    return values


def _parse_model(name: str) -> atmos.SizeModel:
    try:
        return atmos.SizeModel(name.lower())
    except ValueError:
        raise UsageError(f"--model must be kruse or kim, got {name!r}") from None


def _visibility_grid(args) -> list:
    if args.steps < 1:
        raise UsageError(f"--steps must be >= 1, got {args.steps}")
    if not 0 < args.visibility_min <= args.visibility_max:
        raise UsageError(
            f"need 0 < --visibility-min <= --visibility-max, got "
            f"{args.visibility_min}..{args.visibility_max}"
        )
    if args.steps == 1:
        return [args.visibility_min]
    span = args.visibility_max - args.visibility_min
    return [args.visibility_min + span * i / (args.steps - 1) for i in range(args.steps)]


def _parse_selection(text: str):
    """'kaiser' | 'cumulative:<threshold>' | 'fixed:<k>' -> (rule, threshold, k)."""
    rule, _, param = text.partition(":")
    if rule == "kaiser":
        if param:
            raise UsageError("kaiser selection takes no parameter")
        return "kaiser", None, None
    if rule == "cumulative":
        try:
            return "cumulative", float(param), None
        except ValueError:
            raise UsageError(f"cumulative selection needs a number, got {param!r}") from None
    if rule == "fixed":
        try:
            return "fixed", None, int(param)
        except ValueError:
            raise UsageError(f"fixed selection needs an integer, got {param!r}") from None
    raise UsageError(f"--select must be kaiser, cumulative:<t> or fixed:<k>, got {text!r}")


def _load_json_config(path, what: str) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {what} {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed {what} {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise UsageError(f"{what} {path} must hold a JSON object")
    return doc


def _load_link_params(path) -> link.LinkParams:
    if path is None:
        return link.LinkParams()
    doc = _load_json_config(path, "link config")
    try:
        return link.params_from_json(json.dumps(doc))
    except ValueError as exc:
        raise UsageError(f"link config {path}: {exc}") from None


_TRAIN_KEYS = {
    "learning_rate", "max_epochs", "mse_stop", "seed", "batch_mode",
    "hidden_size", "activation_hidden", "activation_output",
}


def _load_train_config(path):
    extras = {"hidden_size": 10, "activation_hidden": "tanh", "activation_output": "linear"}
    if path is None:
        return mlp.TrainConfig(), extras
    doc = _load_json_config(path, "train config")
    for key in doc:
        if key not in _TRAIN_KEYS:
            raise UsageError(f"train config {path}: unknown key {key!r}")
    for key in extras:
        if key in doc:
            extras[key] = doc.pop(key)
    try:
        return mlp.TrainConfig(**doc), extras
    except (TypeError, ValueError) as exc:
        raise UsageError(f"train config {path}: {exc}") from None


_SYNTH_KEYS = {
    "n_features", "m_observations", "factor_loadings", "noise_std",
    "visibility_range_km", "seed", "target",
}
_TARGET_KEYS = {"wavelength_nm", "length_km", "model", "noise_std", "seed", "link"}


def _load_synth_config(path):
    doc = _load_json_config(path, "synth config")
    for key in doc:
        if key not in _SYNTH_KEYS:
            raise UsageError(f"synth config {path}: unknown key {key!r}")
    target_doc = doc.pop("target", {})
    if not isinstance(target_doc, dict):
        raise UsageError(f"synth config {path}: 'target' must be an object")
    for key in target_doc:
        if key not in _TARGET_KEYS:
            raise UsageError(f"synth config {path}: unknown target key {key!r}")
    if "factor_loadings" in doc and doc["factor_loadings"] is not None:
        doc["factor_loadings"] = tuple(doc["factor_loadings"])
    if "visibility_range_km" in doc:
        doc["visibility_range_km"] = tuple(doc["visibility_range_km"])
    try:
        config = dataset.SynthConfig(**doc)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"synth config {path}: {exc}") from None

    link_doc = target_doc.get("link")
    try:
        params = link.params_from_json(json.dumps(link_doc)) if link_doc else link.LinkParams()
    except ValueError as exc:
        raise UsageError(f"synth config {path}: {exc}") from None
    target = {
        "wavelength_nm": float(target_doc.get("wavelength_nm", 1550.0)),
        "length_km": float(target_doc.get("length_km", 1.0)),
        "model": _parse_model(target_doc.get("model", "kruse")),
        "noise_std": float(target_doc.get("noise_std", 1.0)),
        "seed": int(target_doc.get("seed", config.seed + 1)),
        "link": params,
    }
    return config, target


def cmd_attenuation(args) -> int:
    out = _resolve_out(args.out, "attenuation.csv")
    model = _parse_model(args.model)
    wavelengths = _parse_float_list(args.wavelengths, "--wavelengths")
    grid = _visibility_grid(args)
    if args.length_km <= 0:
        raise UsageError(f"--length-km must be > 0, got {args.length_km}")
    rows = atmos.attenuation_sweep(grid, wavelengths, model, length_km=args.length_km)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(atmos.sweep_to_csv(rows))
    RunManifest(
        command="attenuation",
        config_paths=[],
        seeds=[],
        output_dir=str(out.parent),
        tool_version=TOOL_VERSION,
    ).write(out.parent, out.name + ".manifest.json")
    return 0


def cmd_snr(args) -> int:
    out = _resolve_out(args.out, "snr.csv")
    params = _load_link_params(args.link_config)
    if args.tau is not None:
        taus = _parse_float_list(args.tau, "--tau")
        if any(t < 0 for t in taus):
            raise UsageError("--tau values must be >= 0")
        rows = link.snr_sweep(params, taus)
    else:
        model = _parse_model(args.model)
        grid = _visibility_grid(args)
        rows = link.snr_sweep_over_visibility(
            params, grid, model,
            wavelength_nm=args.wavelength_nm, length_km=args.length_km,
        )
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(link.snr_sweep_to_csv(rows))
    RunManifest(
        command="snr",
        config_paths=[args.link_config] if args.link_config else [],
        seeds=[],
        output_dir=str(out.parent),
        tool_version=TOOL_VERSION,
    ).write(out.parent, out.name + ".manifest.json")
    return 0


def _split_fractions(text: str):
    parts = _parse_float_list(text, "--split")
    if len(parts) != 3:
        raise UsageError(f"--split expects three fractions, got {text!r}")
    return tuple(parts)


def _report_or_none(model, table):
    if table.target_snr_db is None or table.n_observations == 0:
        return None
    return pipeline.evaluate_hybrid(model, table).to_json_dict()


def cmd_fit(args) -> int:
    if args.out:
        out_dir = Path(args.out)
    elif os.environ.get(OUT_DIR_ENV):
        out_dir = Path(os.environ[OUT_DIR_ENV])
    else:
        raise UsageError(f"--out is required (or set {OUT_DIR_ENV})")
    rule, threshold, fixed_k = _parse_selection(args.select)
    train_config, extras = _load_train_config(args.train_config)
    fractions = _split_fractions(args.split)

    config_paths = [p for p in (args.data, args.synth_config, args.train_config) if p]
    seeds = [["split", args.split_seed], ["network_init", train_config.seed]]

    if args.data:
        table = dataset.load_observations(args.data)
        if table.target_snr_db is None:
            raise ValueError(f"{args.data}: no {dataset.TARGET_COLUMN} column to fit against")
    else:
        synth_config, target = _load_synth_config(args.synth_config)
        table = dataset.synthesize_weather(synth_config)
        table = dataset.attach_snr_target(
            table, target["link"],
            wavelength_nm=target["wavelength_nm"], length_km=target["length_km"],
            model=target["model"], noise_std=target["noise_std"], seed=target["seed"],
        )
        seeds = [["synth", synth_config.seed], ["target_noise", target["seed"]]] + seeds

    train, val, test = dataset.split(table, fractions, args.split_seed)
    model, history = pipeline.fit_hybrid(
        train, val,
        pca_mode=args.pca_mode, selection_rule=rule, train_config=train_config,
        selection_threshold=threshold, selection_k=fixed_k,
        hidden_size=int(extras["hidden_size"]),
        activation_hidden=extras["activation_hidden"],
        activation_output=extras["activation_output"],
    )

    out_dir.mkdir(parents=True, exist_ok=True)
    model_path = Path(args.out_model) if args.out_model else out_dir / "model.json"
    report_path = Path(args.out_report) if args.out_report else out_dir / "metrics.json"

    model_path.write_text(pipeline.model_to_json(model))
    (out_dir / "scree.csv").write_text(pca.scree_to_csv(model.pca))
    (out_dir / "loss_history.csv").write_text(mlp.history_to_csv(history))
    dataset.save_observations(train, out_dir / "train.csv")
    dataset.save_observations(val, out_dir / "val.csv")
    dataset.save_observations(test, out_dir / "test.csv")

    report = {
        "k_selected": model.k_selected,
        "train": _report_or_none(model, train),
        "val": _report_or_none(model, val),
        "test": _report_or_none(model, test),
    }
    report_text = json.dumps(report, sort_keys=True)
    report_path.write_text(report_text + "\n")
    RunManifest(
        command="fit",
        config_paths=config_paths,
        seeds=seeds,
        output_dir=str(out_dir),
        tool_version=TOOL_VERSION,
    ).write(out_dir)
    print(report_text)
    return 0


def cmd_predict(args) -> int:
    out = _resolve_out(args.out, "predictions.csv")
    try:
        model = pipeline.model_from_json(Path(args.model).read_text())
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        raise ValueError(f"cannot load model {args.model}: {exc}") from None
    table = dataset.load_observations(args.data)
    predicted = pipeline.predict(model, table)

    lines = []
    if table.target_snr_db is None:
        lines.append("timestamp,predicted_snr_db")
        for (date_text, slot), value in zip(table.timestamps, predicted):
            lines.append(f"{date_text} {slot},{float(value)!r}")
    else:
        lines.append("timestamp,predicted_snr_db,actual_snr_db,abs_error")
        for (date_text, slot), value, actual in zip(
            table.timestamps, predicted, table.target_snr_db
        ):
            lines.append(
                f"{date_text} {slot},{float(value)!r},{float(actual)!r},"
                f"{abs(float(actual) - float(value))!r}"
            )
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(lines) + "\n")
    RunManifest(
        command="predict",
        config_paths=[args.model, args.data],
        seeds=[],
        output_dir=str(out.parent),
        tool_version=TOOL_VERSION,
    ).write(out.parent, out.name + ".manifest.json")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fsoqos",
        description="FSO link QoS toolkit: attenuation and SNR sweeps, hybrid PCA/ANN fitting.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_att = sub.add_parser("attenuation", help="sweep extinction/attenuation over visibility")
    p_att.add_argument("--wavelengths", required=True,
                       help="comma-separated wavelengths in nm, e.g. 760,1550")
    p_att.add_argument("--visibility-min", type=float, required=True)
    p_att.add_argument("--visibility-max", type=float, required=True)
    p_att.add_argument("--steps", type=int, required=True)
    p_att.add_argument("--model", default="kruse", help="kruse or kim")
    p_att.add_argument("--length-km", type=float, default=1.0)
    p_att.add_argument("--out", help="output CSV path")
    p_att.set_defaults(func=cmd_attenuation)

    p_snr = sub.add_parser("snr", help="sweep link SNR over attenuation or visibility")
    p_snr.add_argument("--link-config", help="LinkParams JSON file")
    p_snr.add_argument("--tau", help="comma-separated attenuations in dB")
    p_snr.add_argument("--visibility-min", type=float)
    p_snr.add_argument("--visibility-max", type=float)
    p_snr.add_argument("--steps", type=int)
    p_snr.add_argument("--wavelength-nm", type=float)
    p_snr.add_argument("--length-km", type=float, default=1.0)
    p_snr.add_argument("--model", default="kruse")
    p_snr.add_argument("--out", help="output CSV path")
    p_snr.set_defaults(func=cmd_snr)

    p_fit = sub.add_parser("fit", help="fit the hybrid PCA/ANN SNR model")
    source = p_fit.add_mutually_exclusive_group(required=True)
    source.add_argument("--data", help="observation CSV with an snr_db column")
    source.add_argument("--synth-config", help="synthetic-generator JSON config")
    p_fit.add_argument("--pca-mode", choices=pca.MODES, default="correlation")
    p_fit.add_argument("--select", default="kaiser",
                       help="kaiser | cumulative:<threshold> | fixed:<k>")
    p_fit.add_argument("--train-config", help="TrainConfig JSON file")
    p_fit.add_argument("--split", default="0.7,0.15,0.15",
                       help="train,val,test fractions")
    p_fit.add_argument("--split-seed", type=int, default=0)
    p_fit.add_argument("--out", help="output directory")
    p_fit.add_argument("--out-model", help="model JSON path (default <out>/model.json)")
    p_fit.add_argument("--out-report", help="metrics JSON path (default <out>/metrics.json)")
    p_fit.set_defaults(func=cmd_fit)

    p_pred = sub.add_parser("predict", help="apply a saved model to observations")
    p_pred.add_argument("--model", required=True, help="model JSON from fit")
    p_pred.add_argument("--data", required=True, help="observation CSV")
    p_pred.add_argument("--out", help="output CSV path")
    p_pred.set_defaults(func=cmd_predict)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "snr":
        sweep_flags = (args.visibility_min, args.visibility_max, args.steps)
        if args.tau is None and any(v is None for v in sweep_flags):
            parser.error("snr needs --tau or a full --visibility-min/max/--steps sweep")
        if args.tau is not None and any(v is not None for v in sweep_flags):
            parser.error("--tau and the visibility sweep flags are mutually exclusive")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, ArithmeticError,
            pca.ConvergenceError, mlp.DivergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
