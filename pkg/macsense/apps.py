from django.apps import AppConfig


class MacsenseConfig(AppConfig):
    name = 'macsense'
    verbose_name = 'MAC sensing and communication'
