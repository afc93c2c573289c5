import django

from settings import configure_settings


def pytest_configure():
    configure_settings()
    django.setup()
