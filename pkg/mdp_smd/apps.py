"""
mdp_smd.apps
~~~~~~~~~~~~
AppConfig that validates the MDP_SMD settings dict on startup, so a bad
value fails at ``manage.py`` launch rather than deep inside a solve.
"""

from django.apps import AppConfig


class MdpSmdConfig(AppConfig):
    name = "mdp_smd"
    verbose_name = "MDP stochastic mirror descent"

    def ready(self) -> None:
        from .conf import get_config

        get_config()
