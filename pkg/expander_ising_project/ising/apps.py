from django.apps import AppConfig


class IsingConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'expander_ising_project.ising'
    verbose_name = 'Antiferromagnetic Ising on Bipartite Expanders'
