"""
Management command: generate
~~~~~~~~~~~~~~~~~~~~~~~~~~~~
Write a seeded random instance in the ``mdp-smd/v1`` format.

Usage
─────
    python manage.py generate --kind random_mixing --S 5 --actions 3 --alpha 0.3 --seed 7 -o inst.json
    python manage.py generate --kind random_dmdp --S 5 --actions 3 --gamma 0.9 -o dmdp.json
    python manage.py generate --kind constrained --S 4 --actions 2 --K 2 --D-max 1 -o con.json
"""

from __future__ import annotations

from mdp_smd.management.base import SolverCommand, command_errors, int_list
from mdp_smd.mdp import generate_instance
from mdp_smd.mdp.generators import KINDS
from mdp_smd.mdp.oracles import feasibility_margin


class Command(SolverCommand):
    help = "Generate a seeded random MDP instance."

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--kind", choices=KINDS, default="random_mixing")
        parser.add_argument("--S", type=int, required=True, help="Number of states.")
        parser.add_argument(
            "--actions",
            default="2",
            help="Actions per state: one count for every state, or a comma-separated list.",
        )
        parser.add_argument("--alpha", type=float, default=0.3, help="Uniform smoothing weight in (0, 1].")
        parser.add_argument("--gamma", type=float, default=0.9, help="Discount factor (random_dmdp).")
        parser.add_argument("--K", type=int, default=1, help="Number of constraints (constrained).")
        parser.add_argument("--D-max", type=float, default=1.0, help="Raw constraint entry range (constrained).")
        parser.add_argument("--seed", type=int, default=0)
        parser.add_argument("-o", "--output", required=True, help="Instance file to write.")

    def handle(self, *args, **options):
        actions = int_list(options["actions"])
        params = {
            "S": options["S"],
            "actions": actions[0] if len(actions) == 1 else actions,
            "alpha": options["alpha"],
            "gamma": options["gamma"],
            "K": options["K"],
            "D_max": options["D_max"],
        }
        with command_errors():
            mdp = generate_instance(options["kind"], params, options["seed"])
            mdp.save(options["output"])
            margin = feasibility_margin(mdp)[0] if mdp.D is not None else None

        summary = {
            "output": options["output"],
            "kind": options["kind"],
            "S": mdp.n_states,
            "A": mdp.n_pairs,
            "t_mix": mdp.t_mix,
            "feasibility_checked": mdp.feasibility_checked if mdp.D is not None else None,
            "margin": margin,
        }
        if options["json"]:
            self.emit_json(summary)
            return
        self.stdout.write(self.style.SUCCESS(
            f"Wrote {options['output']} ({options['kind']}, S={mdp.n_states}, |A|={mdp.n_pairs})"
        ))
        if mdp.t_mix is not None:
            self.stdout.write(f"  t_mix = {mdp.t_mix}")
        else:
            self.stdout.write(self.style.WARNING("  t_mix not recorded (instance too large for the oracle)"))
        if margin is not None:
            self.stdout.write(f"  feasibility margin = {margin:.6g} (strictly feasible: {margin > 1.0})")
