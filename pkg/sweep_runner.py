"""
sweep_runner.py – Parameter-Sweeps über einen Thread-Pool mit Status je Aufgabe
"""
import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, Iterable

import config_loader as cfg
from errors import WeldError

logger = logging.getLogger(__name__)


def run_batch(items: Iterable, task: Callable, label: Callable = str, workers: int = None,
              progress_callback=None) -> list:
    """
    Führt task(item) für alle Einträge aus; jede Aufgabe ist unabhängig.

    Args:
        items: Parameterwerte (z. B. w- oder t-Liste)
        task: Funktion item -> dict mit Ergebnisgrößen
        label: Beschriftung eines Eintrags für Log und Fortschritt
        workers: Threadanzahl (Standard: WELD_WORKERS)
        progress_callback: Funktion(current, total, message) für Fortschrittsanzeige

    Returns:
        Liste von Ergebnis-Dicts in Eingabereihenfolge
    """
    items = list(items)
    total = len(items)
    n_workers = workers if workers is not None else cfg.worker_count()
    results = [{"item": it, "status": "pending", "result": None, "error": None} for it in items]

    def _run(i: int) -> int:
        entry = results[i]
        try:
            entry["result"] = task(entry["item"])
            entry["status"] = "success"
        except WeldError as e:
            entry["status"] = "error"
            entry["error"] = str(e)
            entry["exception"] = e
            logger.warning("%s fehlgeschlagen: %s", label(entry["item"]), e)
        return i

    if n_workers <= 1 or total <= 1:
        for i in range(total):
            if progress_callback:
                progress_callback(i + 1, total, f"{label(items[i])} – wird gerechnet...")
            _run(i)
        return results

    done = 0
    with ThreadPoolExecutor(max_workers=n_workers) as pool:
        futures = [pool.submit(_run, i) for i in range(total)]
        for fut in as_completed(futures):
            i = fut.result()
            done += 1
            if progress_callback:
                progress_callback(done, total, f"{label(items[i])} – {results[i]['status']}")
    return results


def raise_first_error(results: list):
    """Wirft die erste gespeicherte Ausnahme erneut."""
    for entry in results:
        if entry["status"] == "error":
            raise entry["exception"]
