from django.apps import AppConfig


class OrbitLabConfig(AppConfig):
    name = 'orbitlab'
    verbose_name = 'Orbit Lab'
