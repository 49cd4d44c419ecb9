import logging
import time
from functools import wraps

log = logging.getLogger(__name__)


def retry(times=3, delay=0.5, exceptions=(OSError,)):
    def decorate(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            attempt = 0
            wait = delay
            while True:
                try:
                    return func(*args, **kwargs)
                except exceptions as exc:
                    attempt += 1
                    if attempt >= times:
                        log.error("giving up after %d tries", attempt)
                        raise
                    log.warning("retry %d: %s", attempt, exc)
                    time.sleep(wait)
                    wait = wait * 2
        return wrapper
    return decorate


@retry(times=5)
def fetch(url, session):
    response = session.get(url, timeout=10)
    response.raise_for_status()
    return response.json()
