"""
Management command: verify
~~~~~~~~~~~~~~~~~~~~~~~~~~
Check the inverse-norm, value, power-decay, estimator and gap bounds.
``--builtin`` also runs the norm suite over generated instances.

Exit code 0 iff no row fails; SKIP rows do not count as failures.

Usage
─────
    python manage.py verify --builtin
    python manage.py verify inst.json --seed 3 --draws 50000
    python manage.py verify --builtin --draws 1000000 --iterates 20
    python manage.py verify --builtin --json
"""

from __future__ import annotations

from django.core.management.base import CommandError

from mdp_smd.management.base import EXIT_CONFIG, EXIT_VERIFY, SolverCommand, command_errors
from mdp_smd.mdp import MdpInstance
from mdp_smd.verification import DEFAULT_DRAWS, FAIL, ITERATES, PASS, verify_builtin, verify_instance


class Command(SolverCommand):
    help = "Run the bound checks on an instance or on the builtin suite."

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("instance", nargs="?", default=None, help="Instance file (mdp-smd/v1).")
        parser.add_argument("--builtin", action="store_true", default=False, help="Run the packaged suite.")
        parser.add_argument("--seed", type=int, default=0)
        parser.add_argument(
            "--draws",
            type=int,
            default=DEFAULT_DRAWS,
            help=f"Estimator draws per iterate (default: {DEFAULT_DRAWS:,}).",
        )
        parser.add_argument(
            "--iterates",
            type=int,
            default=ITERATES,
            help=f"Frozen iterates per estimator (default: {ITERATES}).",
        )

    def handle(self, *args, **options):
        if bool(options["instance"]) == options["builtin"]:
            raise CommandError("give an instance file or --builtin, not both", returncode=EXIT_CONFIG)
        if options["draws"] < 1 or options["iterates"] < 1:
            raise CommandError("--draws and --iterates must be positive", returncode=EXIT_CONFIG)
        with command_errors():
            if options["builtin"]:
                report = verify_builtin(options["seed"], options["draws"], options["iterates"])
            else:
                mdp = MdpInstance.load(options["instance"])
                report = verify_instance(mdp, options["seed"], options["draws"], options["iterates"])

        if options["json"]:
            self.emit_json(report.to_dict())
        else:
            header, *lines = report.table().splitlines()
            self.stdout.write(header)
            for row, line in zip(report.rows, lines):
                if row.status == FAIL:
                    self.stdout.write(self.style.ERROR(line))
                elif row.status == PASS:
                    self.stdout.write(line)
                else:
                    self.stdout.write(self.style.WARNING(line))

        if not report.passed:
            failed = sum(1 for row in report.rows if row.status == FAIL)
            raise CommandError(f"{failed} check(s) failed", returncode=EXIT_VERIFY)
        if not options["json"]:
            self.stdout.write(self.style.SUCCESS(f"All {len(report.rows)} checks passed or skipped."))
