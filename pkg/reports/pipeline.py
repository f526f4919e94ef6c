"""End-to-end study: files in, Report out."""
import logging

from django.utils import timezone

from eventstudy.exceptions import NoUsableEvents
from ingest.alignment import align_events, event_keys
from ingest.parsers import load_event_file
from market_model.estimation import build_panel
from studies.statistics import analyze

from .models import Report

logger = logging.getLogger(__name__)


def run_study(cfg):
    """ingest -> returns -> market model -> cross-sectional tests.

    Events that fail alignment or fitting are reported as exclusions; the
    run stops only when fewer than two events remain.
    """
    cfg.validate()
    events = load_event_file(cfg.events_file)
    keys = event_keys(events)

    aligned, exclusions = align_events(events, cfg.data_dir, cfg.windows, strict_day0=cfg.strict_day0)
    if not aligned:
        raise NoUsableEvents(f'none of the {len(events)} events could be aligned')
    fits, panel = build_panel(aligned, cfg.windows, exclusions=exclusions, threads=cfg.threads)
    if panel.total_events < 2:
        raise NoUsableEvents(f'{panel.total_events} usable event(s), need at least 2')

    result = analyze(panel, alpha_level=cfg.alpha_level, policy=cfg.policy)
    generated_at = cfg.fixed_clock or timezone.now().isoformat()
    report = Report.from_result(
        result,
        events=[key for key in keys if key in fits],
        excluded=panel.excluded,
        fits=list(fits.values()),
        config=cfg.as_dict(),
        generated_at=generated_at,
    )
    logger.info('Study on %d events (%d excluded): %s',
                len(report.events), len(report.excluded), report.hypothesis_decision.value)
    return report
