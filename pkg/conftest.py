"""
Root conftest.py - pytest early configuration hook.
Sets environment variables BEFORE pytest-django loads Django.
"""


def pytest_load_initial_conftests(early_config, parser, args):
    """
    This hook runs BEFORE pytest-django calls django.setup().
    Pin the knobs that would otherwise follow the host machine.
    """
    import os
    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "config.settings")
    os.environ["MDP_SMD_THREADS"] = "2"
    os.environ.pop("MDP_SMD_SCHEDULE_CONSTANTS", None)


# pytest only invokes ``pytest_load_initial_conftests`` for plugins, never for
# conftest.py files, so apply the same pins when this module is imported.
pytest_load_initial_conftests(None, None, None)
