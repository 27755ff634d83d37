"""
Management command: solve
~~~~~~~~~~~~~~~~~~~~~~~~~
Run stochastic mirror descent on an instance and write the report.

Usage
─────
    python manage.py solve inst.json --task amdp --eps 0.15 --seed 1 --report report.json --csv trace.csv
    python manage.py solve dmdp.json --task dmdp --eps 0.15 --iterations 200000
    python manage.py solve game.json --task game --eps 0.1 --mode dense --json

``--no-timing`` drops ``wall_ms`` so reports are byte-identical across
seeded runs.
"""

from __future__ import annotations

from mdp_smd.management.base import SolverCommand, command_errors
from mdp_smd.tasks import TASKS, load_instance, run_task


class Command(SolverCommand):
    help = "Solve an MDP, constrained MDP, matrix game or ℓ∞ regression instance."

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("instance", help="Instance file (mdp-smd/v1, or a game file for game/regression).")
        parser.add_argument("--task", choices=TASKS, default="amdp")
        parser.add_argument("--eps", type=float, required=True, help="Target accuracy in (0, 1).")
        parser.add_argument("--seed", type=int, default=0)
        parser.add_argument(
            "--mode",
            choices=("lazy", "dense"),
            default=None,
            help="Iterate averaging strategy (default: MDP_SMD['ACCUMULATOR']).",
        )
        parser.add_argument("--iterations", type=int, default=None, help="Override the iteration budget T.")
        parser.add_argument("--t-mix", type=int, default=None, help="Mixing-time bound for amdp/camdp.")
        parser.add_argument("--report", default=None, help="Write the SolveReport JSON here.")
        parser.add_argument("--csv", default=None, help="Write the checkpoint CSV here.")
        parser.add_argument(
            "--no-timing",
            action="store_true",
            default=False,
            help="Omit wall_ms from the report.",
        )

    def handle(self, *args, **options):
        include_timing = not options["no_timing"]
        with command_errors():
            instance = load_instance(options["task"], options["instance"])
            report = run_task(
                options["task"],
                instance,
                options["eps"],
                options["seed"],
                iterations=options["iterations"],
                accumulator=options["mode"],
                t_mix=options["t_mix"],
            )
        if options["report"]:
            report.write_json(options["report"], include_timing=include_timing)
        if options["csv"]:
            report.write_csv(options["csv"])

        if options["json"]:
            self.emit_json(report.to_dict(include_timing=include_timing))
            return
        self.stdout.write(self.style.SUCCESS(
            f"{options['task']}: T={report.T:,} samples={report.samples:,} gap={report.gap:.6g}"
        ))
        if report.final_subopt is not None:
            self.stdout.write(f"  suboptimality = {report.final_subopt:.6g}")
        for key in ("min_Dmu", "stationarity_l1", "certified_gap"):
            if report.extra.get(key) is not None:
                self.stdout.write(f"  {key} = {report.extra[key]:.6g}")
