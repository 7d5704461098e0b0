"""Address geocoding with sharded dispatch and per-key daily quotas.

A batch is split into contiguous shards, one per API key; shards run
concurrently while requests within a shard stay sequential and
rate-limited. Quota accounting is an atomic check-and-increment on a
shared counter that resets when the (injectable) clock's day changes, so
no schedule can push a key past its daily quota. Every input record gets
exactly one result; once a shard's key is exhausted its remaining records
are all reported as quota-exhausted.

The default provider is an offline deterministic mock; an HTTP JSON
provider with a templated URL is available for real services.
"""

from __future__ import annotations

import json
import threading
import time
import urllib.error
import urllib.parse
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .parallel import split
from .records import EnterpriseRecord
from .vectorizer import fnv1a_64

STATUS_OK = "ok"
STATUS_NO_RESULT = "no-result"
STATUS_QUOTA = "quota-exhausted"
STATUS_PROVIDER_ERROR = "provider-error"

DEFAULT_DAILY_QUOTA = 6000
DEFAULT_RATE = 5.0  # requests per second per key
BACKOFF_SECONDS = (1.0, 2.0, 4.0)

# Mock coordinate bounding box (mainland China).
LON_RANGE = (73.0, 135.0)
LAT_RANGE = (18.0, 54.0)
STREET_JITTER = 0.05  # degrees, per axis


class ProviderError(Exception):
    """Hard provider failure; not retried."""


class TransientProviderError(Exception):
    """Retryable provider failure (timeouts, 5xx, rate clamps)."""


@dataclass
class ApiKey:
    key_id: str
    daily_quota: int = DEFAULT_DAILY_QUOTA
    used_today: int = 0
    day_stamp: date | None = None


class QuotaCounter:
    """Thread-safe daily counter for one key."""

    def __init__(self, key: ApiKey, clock: Callable[[], date] = date.today):
        self.key = key
        self._clock = clock
        self._lock = threading.Lock()

    def try_acquire(self) -> bool:
        """Reserve one request; False when the day's quota is spent."""
        with self._lock:
            today = self._clock()
            if self.key.day_stamp != today:
                self.key.day_stamp = today
                self.key.used_today = 0
            if self.key.used_today >= self.key.daily_quota:
                return False
            self.key.used_today += 1
            return True

    @property
    def used(self) -> int:
        return self.key.used_today


class TokenBucket:
    """Continuous-refill token bucket; capacity equals the refill rate."""

    def __init__(self, rate: float, sleep: Callable[[float], None] = time.sleep):
        if rate <= 0:
            raise ValueError("rate must be > 0")
        self.rate = rate
        self.capacity = max(rate, 1.0)
        self.tokens = self.capacity
        self._last = time.monotonic()
        self._sleep = sleep

    def acquire(self) -> None:
        now = time.monotonic()
        self.tokens = min(self.capacity, self.tokens + (now - self._last) * self.rate)
        self._last = now
        if self.tokens < 1.0:
            self._sleep((1.0 - self.tokens) / self.rate)
            self._last = time.monotonic()
            self.tokens = 1.0
        self.tokens -= 1.0


@dataclass(frozen=True)
class Shard:
    index: int
    records: tuple[EnterpriseRecord, ...]
    key_id: str


@dataclass(frozen=True)
class GeocodeResult:
    record_id: str
    lon: float | None
    lat: float | None
    status: str
    provider: str
    attempts: int


def shard(records: Sequence[EnterpriseRecord], keys: Sequence[ApiKey]) -> list[Shard]:
    """Contiguous even shards, one key per shard; empty input, no shards."""
    if not keys:
        raise ValueError("at least one API key is required")
    if not records:
        return []
    parts = split(records, min(len(keys), len(records)))
    return [Shard(i, tuple(part), keys[i].key_id) for i, part in enumerate(parts)]


def _unit_interval(h32: int) -> float:
    return h32 / 2**32


class MockGeocoder:
    """Deterministic offline provider.

    The address's AD prefix (everything before the last space) hashes to a
    base point inside the China bounding box; the street part perturbs the
    base by at most STREET_JITTER degrees per axis, so addresses sharing
    an AD prefix land near each other but not on top of each other.

    ambiguity_filter, when given, marks addresses as unresolvable: it
    receives the address and returns True to reject it (no-result).
    """

    name = "mock"

    def __init__(self, ambiguity_filter: Callable[[str], bool] | None = None):
        self.ambiguity_filter = ambiguity_filter

    def geocode(self, address: str, api_key: str | None = None) -> tuple[float, float] | None:
        if not address:
            return None
        if self.ambiguity_filter is not None and self.ambiguity_filter(address):
            return None
        prefix, _, street = address.rpartition(" ")
        if not prefix:
            prefix, street = address, ""
        h = fnv1a_64(prefix.encode("utf-8"))
        lon = LON_RANGE[0] + _unit_interval(h >> 32) * (LON_RANGE[1] - LON_RANGE[0])
        lat = LAT_RANGE[0] + _unit_interval(h & 0xFFFFFFFF) * (LAT_RANGE[1] - LAT_RANGE[0])
        if street:
            j = fnv1a_64(street.encode("utf-8"))
            lon += (_unit_interval(j >> 32) - 0.5) * 2 * STREET_JITTER
            lat += (_unit_interval(j & 0xFFFFFFFF) - 0.5) * 2 * STREET_JITTER
        lon = min(max(lon, LON_RANGE[0]), LON_RANGE[1])
        lat = min(max(lat, LAT_RANGE[0]), LAT_RANGE[1])
        return lon, lat


def ad_prefix_filter(known_prefixes: Iterable[str]) -> Callable[[str], bool]:
    """Ambiguity filter that rejects addresses whose AD prefix (the part
    before the last space) is not one of the known prefixes."""
    known = frozenset(known_prefixes)

    def is_ambiguous(address: str) -> bool:
        prefix, _, _ = address.rpartition(" ")
        return prefix not in known

    return is_ambiguous


class HttpGeocoder:
    """Generic HTTP JSON geocoder.

    url_template receives {address} (percent-encoded) and {key}. lon_path
    and lat_path are dot-separated paths into the response JSON."""

    name = "http"

    def __init__(
        self,
        url_template: str,
        lon_path: str = "result.location.lng",
        lat_path: str = "result.location.lat",
        timeout: float = 10.0,
    ):
        self.url_template = url_template
        self.lon_path = lon_path.split(".")
        self.lat_path = lat_path.split(".")
        self.timeout = timeout

    @staticmethod
    def _dig(doc, path):
        for part in path:
            if not isinstance(doc, dict) or part not in doc:
                return None
            doc = doc[part]
        return doc

    def geocode(self, address: str, api_key: str | None = None) -> tuple[float, float] | None:
        if not address:
            return None
        url = self.url_template.format(
            address=urllib.parse.quote(address), key=urllib.parse.quote(api_key or "")
        )
        try:
            with urllib.request.urlopen(url, timeout=self.timeout) as resp:
                doc = json.load(resp)
        except urllib.error.HTTPError as exc:
            if exc.code >= 500:
                raise TransientProviderError(f"HTTP {exc.code}") from exc
            raise ProviderError(f"HTTP {exc.code}") from exc
        except (urllib.error.URLError, TimeoutError, json.JSONDecodeError) as exc:
            raise TransientProviderError(str(exc)) from exc
        lon = self._dig(doc, self.lon_path)
        lat = self._dig(doc, self.lat_path)
        if lon is None or lat is None:
            return None
        return float(lon), float(lat)


def _geocode_one(record, provider, counter, limiter, exhausted, max_attempts, sleep):
    if exhausted[0]:
        return GeocodeResult(record.id, None, None, STATUS_QUOTA, provider.name, 0)
    address = record.address or ""
    attempts = 0
    while attempts < max_attempts:
        if not counter.try_acquire():
            exhausted[0] = True
            return GeocodeResult(record.id, None, None, STATUS_QUOTA, provider.name, attempts)
        if limiter is not None:
            limiter.acquire()
        attempts += 1
        try:
            coords = provider.geocode(address, api_key=counter.key.key_id)
        except TransientProviderError:
            if attempts < max_attempts:
                sleep(BACKOFF_SECONDS[min(attempts - 1, len(BACKOFF_SECONDS) - 1)])
            continue
        except ProviderError:
            return GeocodeResult(record.id, None, None, STATUS_PROVIDER_ERROR, provider.name, attempts)
        if coords is None:
            return GeocodeResult(record.id, None, None, STATUS_NO_RESULT, provider.name, attempts)
        return GeocodeResult(record.id, coords[0], coords[1], STATUS_OK, provider.name, attempts)
    return GeocodeResult(record.id, None, None, STATUS_PROVIDER_ERROR, provider.name, attempts)


def geocode_batch(
    shards: Sequence[Shard],
    provider,
    keys: Sequence[ApiKey],
    rate: float | None = DEFAULT_RATE,
    max_attempts: int = 3,
    sleep: Callable[[float], None] = time.sleep,
    clock: Callable[[], date] = date.today,
) -> list[GeocodeResult]:
    """Geocode all shards concurrently; one result per input record, in
    input order. rate=None disables request pacing (offline providers)."""
    if not shards:
        return []
    counters = {key.key_id: QuotaCounter(key, clock) for key in keys}

    def run_shard(sh: Shard) -> list[GeocodeResult]:
        counter = counters[sh.key_id]
        limiter = TokenBucket(rate, sleep) if rate is not None else None
        exhausted = [False]
        return [
            _geocode_one(rec, provider, counter, limiter, exhausted, max_attempts, sleep)
            for rec in sh.records
        ]

    with ThreadPoolExecutor(max_workers=len(shards)) as pool:
        per_shard = list(pool.map(run_shard, shards))
    return [result for chunk in per_shard for result in chunk]


def apply_results(records: Sequence[EnterpriseRecord], results: Sequence[GeocodeResult]) -> int:
    """Attach ok coordinates to records (matched by id); returns the count."""
    by_id = {r.record_id: r for r in results}
    applied = 0
    for rec in records:
        res = by_id.get(rec.id)
        if res is not None and res.status == STATUS_OK:
            rec.coordinates = (res.lon, res.lat)
            rec.mark_imputed("coordinates")
            applied += 1
    return applied


def read_keys(path: str | Path) -> list[ApiKey]:
    """Key file: key<TAB>daily_quota per line."""
    keys = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n").rstrip("\r")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{line_no}: expected key<TAB>quota")
            keys.append(ApiKey(parts[0], int(parts[1])))
    if not keys:
        raise ValueError(f"{path}: no keys")
    return keys


def write_results(results: Sequence[GeocodeResult], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("id\tlon\tlat\tstatus\n")
        for r in results:
            lon = repr(r.lon) if r.lon is not None else ""
            lat = repr(r.lat) if r.lat is not None else ""
            fh.write(f"{r.record_id}\t{lon}\t{lat}\t{r.status}\n")


def ok_rate(results: Sequence[GeocodeResult]) -> float:
    if not results:
        return 0.0
    return sum(1 for r in results if r.status == STATUS_OK) / len(results)
