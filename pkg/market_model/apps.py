from django.apps import AppConfig


class MarketModelConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "market_model"
