"""
Management command: sweep
~~~~~~~~~~~~~~~~~~~~~~~~~
Run a solver over an (eps, seed) grid and write the sweep CSV.

Usage
─────
    python manage.py sweep experiment.json
    python manage.py sweep --task amdp --instance inst.json --eps 0.4,0.2,0.1 --seeds 0-9 -o sweep.csv
    python manage.py sweep experiment.json --threads 8 --json

Flags given on the command line override the matching spec-file fields.
"""

from __future__ import annotations

import time

from django.core.management.base import CommandError

from mdp_smd.conf import get_config
from mdp_smd.management.base import EXIT_CONFIG, SolverCommand, command_errors, float_list, int_list
from mdp_smd.sweep import ExperimentSpec, run_sweep
from mdp_smd.tasks import TASKS

_OVERRIDES = ("task", "instance", "iterations", "t_mix", "output")


class Command(SolverCommand):
    help = "Sweep a solver over eps values and seeds, then fit the samples-vs-eps slope."

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("spec", nargs="?", default=None, help="Experiment spec JSON file.")
        parser.add_argument("--task", choices=TASKS, default=None)
        parser.add_argument("--eps", default=None, help="Comma-separated eps values.")
        parser.add_argument("--seeds", default=None, help="Seed range like 0-9, or a comma-separated list.")
        parser.add_argument("--instance", default=None, help="Instance file.")
        parser.add_argument("--iterations", type=int, default=None, help="Override T for every cell.")
        parser.add_argument("--mode", choices=("lazy", "dense"), default=None, help="Iterate averaging strategy.")
        parser.add_argument("--t-mix", type=int, default=None)
        parser.add_argument("-o", "--output", default=None, help="CSV file to write.")
        parser.add_argument(
            "--threads",
            type=int,
            default=None,
            help="Worker threads (default: MDP_SMD['THREADS']).",
        )

    def handle(self, *args, **options):
        with command_errors():
            spec = self._build_spec(options)
            threads = options["threads"] or get_config()["threads"]
            if not options["json"]:
                self.stdout.write(
                    f"Sweeping {spec.task}: {len(spec.eps)} eps × {len(spec.seeds)} seeds on {threads} threads…"
                )
            t0 = time.perf_counter()
            result = run_sweep(spec, threads=threads)
            elapsed = time.perf_counter() - t0

        if spec.output:
            result.write_csv(spec.output)
        if options["json"]:
            self.emit_json({
                "task": spec.task,
                "medians": {repr(eps): value for eps, value in result.medians().items()},
                "slope": result.slope,
                "output": spec.output,
            })
            return
        if not spec.output:
            self.stdout.write(result.csv_text().rstrip("\n"))
        for eps, value in result.medians().items():
            shown = "not reached" if value is None else f"{value:,.0f}"
            self.stdout.write(f"  eps={eps:g}: median samples-to-target {shown}")
        slope = "undetermined" if result.slope is None else f"{result.slope:.3f}"
        self.stdout.write(self.style.SUCCESS(f"Done in {elapsed:.1f}s, log-log slope {slope}"))

    def _build_spec(self, options) -> ExperimentSpec:
        if options["spec"]:
            data = ExperimentSpec.load(options["spec"]).__dict__.copy()
        else:
            data = {"generator": None}
        for key in _OVERRIDES:
            if options[key] is not None:
                data[key] = options[key]
        if options["instance"] is not None:
            data["generator"] = None
        if options["mode"] is not None:
            data["accumulator"] = options["mode"]
        if options["eps"] is not None:
            data["eps"] = float_list(options["eps"])
        if options["seeds"] is not None:
            data["seeds"] = int_list(options["seeds"])
        missing = [key for key in ("task", "eps", "seeds") if key not in data]
        if missing:
            raise CommandError(f"missing {', '.join(missing)}: give a spec file or the flags", returncode=EXIT_CONFIG)
        return ExperimentSpec.from_dict(data)
