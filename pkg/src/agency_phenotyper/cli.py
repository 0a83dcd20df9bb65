"""Command-line front end.

Exit codes: 0 success, 1 runtime error, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import functools
import json
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .empowerment import (
    Variant,
    actual_empowerment,
    blahut_arimoto,
    modality_restricted_channel,
    objective_channel,
    subjective_channel,
)
from .exceptions import AgencyError, InvalidModel
from .inference import MODES, select_action
from .model import GenerativeModel, validate_model
from .phenotyping import ManipulationSpec, classify_phenotype, run_battery
from .prob import Categorical, Channel
from .tmaze import BUILTIN_MODELS, Context, Position, environment_for_model, resolve_model

SEED_ENV = "AGENCY_PHENOTYPER_SEED"
FORMATS = ("json", "csv", "table")


class ConfigError(Exception):
    def __init__(self, field_name, message):
        self.field = field_name
        super().__init__(f"{field_name}: {message}")


def _default_seeds():
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return [0]
    try:
        return [int(raw)]
    except ValueError:
        raise ConfigError("seeds", f"{SEED_ENV}={raw!r} is not an integer") from None


@dataclass
class RunConfig:
    model: str = "minimal-tmaze"
    preset: str = "standard"
    presets: list = field(default_factory=lambda: ["standard", "preference-inverted"])
    horizon: int = 2
    gamma: float = 16.0
    mode: str = "argmax"
    seeds: list | None = None
    context: str | None = None
    format: str = "table"
    output: str | None = None
    jobs: int = 1

    @classmethod
    def build(cls, args, keys):
        """Defaults, then the JSON config file, then explicit flags."""
        values = {}
        if getattr(args, "config", None):
            try:
                values.update(json.loads(Path(args.config).read_text()))
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError("config", str(exc)) from None
        for key in keys:
            flag = getattr(args, key, None)
            if flag is not None:
                values[key] = flag
        known = {f.name for f in fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown configuration key")
        cfg = cls(**values)
        if cfg.seeds is None:
            cfg.seeds = _default_seeds()
        cfg.validate()
        return cfg

    def validate(self):
        if not isinstance(self.horizon, int) or self.horizon < 1:
            raise ConfigError("horizon", f"must be an integer >= 1, got {self.horizon!r}")
        if not isinstance(self.gamma, (int, float)) or self.gamma < 0:
            raise ConfigError("gamma", f"must be >= 0, got {self.gamma!r}")
        if self.mode not in MODES:
            raise ConfigError("mode", f"must be one of {MODES}, got {self.mode!r}")
        if not isinstance(self.seeds, list) or not self.seeds or not all(isinstance(s, int) for s in self.seeds):
            raise ConfigError("seeds", "must be a non-empty list of integers")
        if self.format not in FORMATS:
            raise ConfigError("format", f"must be one of {FORMATS}, got {self.format!r}")
        if not isinstance(self.jobs, int) or self.jobs < 1:
            raise ConfigError("jobs", "must be an integer >= 1")
        if self.context is not None and self.context not in {c.value for c in Context}:
            raise ConfigError("context", f"must be one of {[c.value for c in Context]}")
        if self.model not in BUILTIN_MODELS and not Path(self.model).is_file():
            raise ConfigError("model", f"{self.model!r} is neither a builtin ({sorted(BUILTIN_MODELS)}) nor a file")

    def spec(self) -> ManipulationSpec:
        try:
            return ManipulationSpec.parse(self.preset)
        except AgencyError as exc:
            raise ConfigError("preset", str(exc)) from None

    def specs(self) -> list:
        if not isinstance(self.presets, list) or not self.presets:
            raise ConfigError("presets", "must list at least one preset")
        try:
            return [ManipulationSpec.parse(p) for p in self.presets]
        except AgencyError as exc:
            raise ConfigError("presets", str(exc)) from None

    def echo(self, keys):
        d = asdict(self)
        return {k: d[k] for k in keys}


def _env_with_context(model, seed, context=None):
    return environment_for_model(model, seed=seed, context=context)


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _emit(text, output):
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _table(header, rows):
    widths = [max(len(str(x)) for x in col) for col in zip(header, *rows)]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    lines = [fmt.format(*header), fmt.format(*("-" * w for w in widths))]
    lines += [fmt.format(*map(str, row)) for row in rows]
    return "\n".join(line.rstrip() for line in lines) + "\n"


def _f5(x):
    return f"{x:.5f}"


RUN_COLUMNS = (
    "seed", "step", "action", "observation", "epistemic_bits", "pragmatic", "efe",
    "subjective_potential", "subjective_actual", "objective_potential", "phenotype",
)


def run_table(doc) -> str:
    """Step table built only from the JSON document, so every number round-trips."""
    rows = []
    n_actions = doc["n_actions"]
    for trace in doc["traces"]:
        for step in trace["steps"]:
            chosen = next(b for b in step["efe"] if b["action"] == step["action"])
            emp = step["empowerment"]
            sp = emp[Variant.SUBJECTIVE_POTENTIAL.value]["bits"]
            rows.append([
                trace["seed"], step["step"], step["action"], step["observation"],
                _f5(chosen["epistemic_bits"]), _f5(chosen["pragmatic"]), _f5(chosen["efe"]),
                _f5(sp), _f5(emp[Variant.SUBJECTIVE_ACTUAL.value]["bits"]),
                _f5(emp[Variant.OBJECTIVE_POTENTIAL.value]["bits"]),
                classify_phenotype(sp, n_actions).phenotype.label,
            ])
    return _table(RUN_COLUMNS, rows)


def cmd_run(args) -> int:
    keys = ("model", "preset", "horizon", "gamma", "mode", "seeds", "context", "format", "output", "jobs")
    cfg = RunConfig.build(args, keys)
    spec = cfg.spec()
    model = resolve_model(cfg.model)
    factory = functools.partial(_env_with_context, context=cfg.context)
    report = run_battery(model, cfg.seeds, [spec], cfg.horizon, cfg.gamma, cfg.mode, env_factory=factory, jobs=cfg.jobs)
    doc = {
        "config": cfg.echo(("model", "preset", "horizon", "gamma", "mode", "seeds", "context")),
        "n_actions": model.n_actions,
        "traces": [cell.trace.to_dict() for cell in report.cells],
    }
    if cfg.format == "json":
        text = _dump_json(doc)
    elif cfg.format == "csv":
        text = report.to_csv()
    else:
        text = run_table(doc)
    _emit(text, cfg.output)
    if cfg.output:
        sys.stdout.write(run_table(doc))
    return 0


def cmd_phenotype(args) -> int:
    keys = ("model", "presets", "horizon", "gamma", "mode", "seeds", "context", "format", "output", "jobs")
    cfg = RunConfig.build(args, keys)
    specs = cfg.specs()
    model = resolve_model(cfg.model)
    factory = functools.partial(_env_with_context, context=cfg.context)
    report = run_battery(model, cfg.seeds, specs, cfg.horizon, cfg.gamma, cfg.mode, env_factory=factory, jobs=cfg.jobs)
    summary = "\n".join(report.summary_lines()) + "\n"
    if cfg.format == "json":
        doc = {"config": cfg.echo(("model", "presets", "horizon", "gamma", "mode", "seeds", "context"))}
        doc.update(report.to_dict())
        text = _dump_json(doc)
    elif cfg.format == "csv":
        text = report.to_csv()
    else:
        text = summary
    _emit(text, cfg.output)
    if cfg.output:
        sys.stdout.write(summary)
    return 0


def _load_channel(path) -> Channel:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError("channel", str(exc)) from None
    except json.JSONDecodeError as exc:
        raise AgencyError(f"malformed channel file: {exc}") from None
    try:
        return Channel.from_dict(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise AgencyError(f"malformed channel file: {exc}") from None


def _belief_for(model: GenerativeModel, args) -> Categorical:
    if args.belief_probs:
        try:
            return Categorical(model.state_labels, args.belief_probs)
        except AgencyError as exc:
            raise ConfigError("belief-probs", str(exc)) from None
    if args.belief:
        if args.belief not in model.state_labels:
            raise ConfigError("belief", f"unknown state {args.belief!r}; expected one of {model.state_labels}")
        return Categorical.delta(model.state_labels, args.belief)
    return model.prior


def cmd_empowerment(args) -> int:
    if bool(args.channel) == bool(args.model):
        raise ConfigError("channel", "give exactly one of --channel or --model")
    model = None
    if args.channel:
        if args.objective:
            raise ConfigError("objective", "needs --model (a channel file has no environment)")
        ch = _load_channel(args.channel)
    else:
        if args.model not in BUILTIN_MODELS and not Path(args.model).is_file():
            raise ConfigError("model", f"{args.model!r} is neither a builtin nor a file")
        model = resolve_model(args.model)
        if args.objective:
            env = environment_for_model(model, context=args.context or Context.CHEESE_LEFT.value)
            env.position = Position(args.position)
            ch = objective_channel(env, condition_on_context=args.context is not None)
        else:
            ch = subjective_channel(model, _belief_for(model, args))
    if args.modalities:
        ch = modality_restricted_channel(ch, args.modalities)

    side = "objective" if args.objective else "subjective"
    if args.actual:
        variant = Variant(f"{side}_actual")
        if args.policy:
            try:
                policy = Categorical(ch.input_labels, args.policy)
            except AgencyError as exc:
                raise ConfigError("policy", str(exc)) from None
        elif model is not None:
            _, policy = select_action(_belief_for(model, args), model, args.gamma, "argmax")
            policy = policy.reorder(ch.input_labels)
        else:
            raise ConfigError("policy", "--actual on a channel file needs --policy")
        reading = actual_empowerment(ch, policy, variant=variant)
    else:
        variant = Variant(f"{side}_potential")
        reading = blahut_arimoto(ch, tol=args.tol, max_iter=args.max_iter, variant=variant)

    if args.format == "json":
        sys.stdout.write(_dump_json({"channel": ch.to_dict(), "reading": reading.to_dict()}))
        return 0
    lines = [f"variant: {reading.variant.value}", f"bits: {_f5(reading.bits)}"]
    if reading.optimal_input is not None:
        dist = " ".join(f"{k}={_f5(v)}" for k, v in reading.optimal_input.as_dict().items())
        lines += [
            f"optimal_input: {dist}",
            f"iterations: {reading.iterations}",
            f"converged: {reading.converged}",
            f"gap: {reading.gap:.3e}",
        ]
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def cmd_validate(args) -> int:
    try:
        doc = json.loads(Path(args.path).read_text())
    except OSError as exc:
        raise ConfigError("path", str(exc)) from None
    except json.JSONDecodeError as exc:
        print(f"malformed JSON: {exc}")
        return 1
    try:
        model = GenerativeModel.from_dict(doc)
    except (KeyError, TypeError, ValueError) as exc:
        print(f"malformed model document: {exc}")
        return 1
    violations = validate_model(model)
    if not violations:
        print(f"{args.path}: valid")
        return 0
    for v in violations:
        print(f"{v.kind} at {v.location}: {v.message}")
    return 1


def _add_run_options(p, multi_preset=False):
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--model", help=f"builtin ({', '.join(BUILTIN_MODELS)}) or model file path")
    if multi_preset:
        p.add_argument("--presets", nargs="*", help="presets, e.g. standard likelihood-corrupted:0.5")
    else:
        p.add_argument("--preset", help="manipulation preset, e.g. preference-inverted")
    p.add_argument("--horizon", type=int)
    p.add_argument("--gamma", type=float, help="policy precision (softmax mode)")
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--seeds", type=int, nargs="+", help=f"default: ${SEED_ENV} or 0")
    p.add_argument("--context", choices=[c.value for c in Context], help="fix the cheese side")
    p.add_argument("--format", choices=FORMATS)
    p.add_argument("--output", help="write the formatted result here")
    p.add_argument("--jobs", type=int, help="worker processes for seed-parallel runs")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="agency-phenotyper", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run episodes and print the step table")
    _add_run_options(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("phenotype", help="run a manipulation battery and summarize phenotypes")
    _add_run_options(p, multi_preset=True)
    p.set_defaults(func=cmd_phenotype)

    p = sub.add_parser("empowerment", help="empowerment of a channel file or a model belief")
    p.add_argument("--channel", help="channel JSON file (inputs, outputs, rows, optional modalities)")
    p.add_argument("--model", help="builtin model name or model file")
    p.add_argument("--belief", help="state label for a point-mass belief (default: the model prior)")
    p.add_argument("--belief-probs", type=float, nargs="+", help="full belief vector over model states")
    p.add_argument("--objective", action="store_true", help="use the environment's true dynamics")
    p.add_argument("--position", default=Position.CENTER.value, choices=[x.value for x in Position])
    p.add_argument("--context", choices=[c.value for c in Context], help="condition the objective channel")
    p.add_argument("--actual", action="store_true", help="mutual information at a fixed policy")
    p.add_argument("--policy", type=float, nargs="+", help="policy over channel inputs (default: argmax)")
    p.add_argument("--gamma", type=float, default=16.0)
    p.add_argument("--modalities", nargs="+", help="restrict outputs to these modalities")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--max-iter", type=int, default=10_000)
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.set_defaults(func=cmd_empowerment)

    p = sub.add_parser("validate", help="check a model file")
    p.add_argument("path")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InvalidModel as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (AgencyError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
