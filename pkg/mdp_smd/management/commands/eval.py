"""
Management command: eval
~~~~~~~~~~~~~~~~~~~~~~~~
Evaluate a policy exactly against an instance.

The policy file is either ``{"policy": [[...], ...]}`` or a SolveReport.

Usage
─────
    python manage.py eval inst.json report.json
    python manage.py eval dmdp.json policy.json --task dmdp --json
"""

from __future__ import annotations

from mdp_smd.management.base import SolverCommand, command_errors
from mdp_smd.mdp import MdpInstance, Policy, evaluation_report
from mdp_smd.mdp.oracles import DISCOUNTED, MIXING

_MODES = {"amdp": MIXING, "dmdp": DISCOUNTED}


class Command(SolverCommand):
    help = "Evaluate a policy with the exact oracles."

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("instance", help="Instance file (mdp-smd/v1).")
        parser.add_argument("policy", help="Policy file or SolveReport JSON.")
        parser.add_argument(
            "--task",
            choices=tuple(_MODES),
            default=None,
            help="Criterion (default: dmdp when the instance has gamma, else amdp).",
        )
        parser.add_argument("--t-mix", type=int, default=None, help="Mixing-time bound for the norm check.")

    def handle(self, *args, **options):
        mode = _MODES.get(options["task"]) if options["task"] else None
        with command_errors():
            mdp = MdpInstance.load(options["instance"])
            policy = Policy.load(options["policy"])
            report = evaluation_report(mdp, policy, mode, options["t_mix"])

        if options["json"]:
            self.emit_json(report)
            return
        self.stdout.write(self.style.SUCCESS(f"{report['mode']}: v_bar = {report['v_bar']:.10g}"))
        norms = report["norms"]
        style = self.style.SUCCESS if norms["passed"] else self.style.ERROR
        self.stdout.write(style(f"  inverse norm {norms['norm']:.6g} ≤ {norms['bound']:.6g}: {norms['passed']}"))
        if report["t_mix"] is not None:
            self.stdout.write(f"  t_mix = {report['t_mix']}")
        if "subopt" in report:
            self.stdout.write(f"  optimal v_bar = {report['v_bar_opt']:.10g}, suboptimality = {report['subopt']:.6g}")
