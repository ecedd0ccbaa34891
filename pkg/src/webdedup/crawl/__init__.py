from .drivers import AppDriver, FixtureDriver, Scenario, StaticSiteDriver, load_scenario
from .engine import (
    CrawlBudget,
    CrawlModel,
    Edge,
    LogEntry,
    StateRecord,
    crawl,
    is_duplicate,
    path_edges,
    path_to,
)
from .events import CLICK, FILL, Event
from .model_io import crawl_model_from_dict, crawl_model_to_dict, dumps_crawl_model, load_crawl_model, save_crawl_model

__all__ = [
    "AppDriver",
    "CLICK",
    "CrawlBudget",
    "CrawlModel",
    "Edge",
    "Event",
    "FILL",
    "FixtureDriver",
    "LogEntry",
    "Scenario",
    "StateRecord",
    "StaticSiteDriver",
    "crawl",
    "crawl_model_from_dict",
    "crawl_model_to_dict",
    "dumps_crawl_model",
    "is_duplicate",
    "load_crawl_model",
    "load_scenario",
    "path_edges",
    "path_to",
    "save_crawl_model",
]
