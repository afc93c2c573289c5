from orbitlab.conf import configure


def configure_settings():
    """
    Configures settings for manage.py and for run_tests.py.
    """
    configure(
        TEST_RUNNER='django.test.runner.DiscoverRunner',
        ORBITLAB={
            # Keep test runs inside the working tree
            'OUTPUT_DIR': 'orbitlab_test_runs',
        },
    )
