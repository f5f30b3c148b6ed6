"""Boundary polygons, point-in-polygon DA assignment, and geocoding clients.

Coordinates are (lon, lat) degrees treated as planar; at city scale the
containment error is negligible. Containment uses the even-odd rule with
points on any ring edge counting as inside.
"""

from __future__ import annotations

import json
import urllib.parse
import urllib.request
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, GeocodeClientError, ParseError, ValidationError
from .kernels import point_in_rings

Ring = np.ndarray  # (n, 2) closed: last vertex equals first


def _orient(ax, ay, bx, by, cx, cy) -> float:
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _on_segment(ax, ay, bx, by, px, py) -> bool:
    return (
        min(ax, bx) <= px <= max(ax, bx)
        and min(ay, by) <= py <= max(ay, by)
    )


def _segments_intersect(p1, p2, p3, p4) -> bool:
    d1 = _orient(*p3, *p4, *p1)
    d2 = _orient(*p3, *p4, *p2)
    d3 = _orient(*p1, *p2, *p3)
    d4 = _orient(*p1, *p2, *p4)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 != 0 and d2 != 0 and d3 != 0 and d4 != 0:
        return True
    if d1 == 0 and _on_segment(*p3, *p4, *p1):
        return True
    if d2 == 0 and _on_segment(*p3, *p4, *p2):
        return True
    if d3 == 0 and _on_segment(*p1, *p2, *p3):
        return True
    if d4 == 0 and _on_segment(*p1, *p2, *p4):
        return True
    return False


def _validate_ring(ring: Ring, da_id: str, what: str) -> None:
    if ring.shape[0] < 4:
        raise ValidationError(f"DA {da_id}: {what} has {ring.shape[0]} points, need >= 4")
    if not (ring[0] == ring[-1]).all():
        raise ValidationError(f"DA {da_id}: {what} is not closed (first != last)")
    if not np.isfinite(ring).all():
        raise ValidationError(f"DA {da_id}: {what} has non-finite coordinates")


def _check_simple(ring: Ring, da_id: str) -> None:
    """Reject self-intersecting outer rings via an x-sorted segment sweep."""
    n = ring.shape[0] - 1
    segs = []
    for i in range(n):
        a, b = ring[i], ring[i + 1]
        segs.append((min(a[0], b[0]), max(a[0], b[0]), i))
    segs.sort()
    active: list[tuple[float, int]] = []
    for minx, maxx, i in segs:
        active = [(mx, j) for mx, j in active if mx >= minx]
        a1 = (ring[i][0], ring[i][1])
        a2 = (ring[i + 1][0], ring[i + 1][1])
        for _, j in active:
            # consecutive segments share one endpoint by construction
            if abs(i - j) == 1 or abs(i - j) == n - 1:
                continue
            b1 = (ring[j][0], ring[j][1])
            b2 = (ring[j + 1][0], ring[j + 1][1])
            if _segments_intersect(a1, a2, b1, b2):
                raise ValidationError(
                    f"DA {da_id}: outer ring self-intersects (segments {j} and {i})"
                )
        active.append((maxx, i))


@dataclass(frozen=True)
class DAPolygon:
    """All boundary parts of one DA; parts[i][0] is an outer ring, the rest holes."""

    da_id: str
    parts: tuple[tuple[Ring, ...], ...]
    bbox: tuple[float, float, float, float] = field(init=False)
    _flat: tuple[np.ndarray, np.ndarray, np.ndarray] = field(init=False, repr=False)

    def __post_init__(self):
        if not self.parts:
            raise ValidationError(f"DA {self.da_id}: no rings")
        rings = []
        for part in self.parts:
            for k, ring in enumerate(part):
                _validate_ring(ring, self.da_id, "outer ring" if k == 0 else f"hole {k}")
                rings.append(ring)
            _check_simple(part[0], self.da_id)
        xs = np.concatenate([r[:, 0] for r in rings])
        ys = np.concatenate([r[:, 1] for r in rings])
        offsets = np.zeros(len(rings) + 1, dtype=np.int64)
        for i, r in enumerate(rings):
            offsets[i + 1] = offsets[i] + r.shape[0]
        object.__setattr__(self, "bbox", (xs.min(), ys.min(), xs.max(), ys.max()))
        object.__setattr__(self, "_flat", (xs, ys, offsets))

    def contains(self, lon: float, lat: float) -> bool:
        x0, y0, x1, y1 = self.bbox
        if lon < x0 or lon > x1 or lat < y0 or lat > y1:
            return False
        xs, ys, offsets = self._flat
        return bool(point_in_rings(lon, lat, xs, ys, offsets))


@dataclass(frozen=True)
class GeoIndex:
    polygons: dict[str, DAPolygon]

    def __post_init__(self):
        for da_id, poly in self.polygons.items():
            if poly.da_id != da_id:
                raise ValidationError(f"index key {da_id!r} != polygon id {poly.da_id!r}")

    @property
    def da_ids(self) -> list[str]:
        return list(self.polygons)


def _rings_from_coords(coords, da_id: str) -> tuple[Ring, ...]:
    rings = []
    for ring in coords:
        arr = np.asarray(ring, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ParseError(f"DA {da_id}: ring is not a list of [lon, lat] pairs")
        rings.append(arr)
    if not rings:
        raise ParseError(f"DA {da_id}: polygon with no rings")
    return tuple(rings)


def load_geojson(path: str | Path) -> GeoIndex:
    """Load a FeatureCollection of Polygon/MultiPolygon features keyed by DAUID."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict) or doc.get("type") != "FeatureCollection":
        raise ParseError(f"{path}: expected a GeoJSON FeatureCollection")
    polygons: dict[str, DAPolygon] = {}
    for i, feat in enumerate(doc.get("features", [])):
        props = feat.get("properties") or {}
        da_id = props.get("DAUID")
        if not isinstance(da_id, str) or not da_id:
            raise ValidationError(f"{path}: feature {i} lacks a string DAUID property")
        if da_id in polygons:
            raise ValidationError(f"{path}: duplicate DAUID {da_id!r}")
        geom = feat.get("geometry") or {}
        gtype = geom.get("type")
        coords = geom.get("coordinates")
        if gtype == "Polygon":
            parts = (_rings_from_coords(coords, da_id),)
        elif gtype == "MultiPolygon":
            parts = tuple(_rings_from_coords(c, da_id) for c in coords)
        else:
            raise ParseError(f"{path}: DA {da_id}: unsupported geometry type {gtype!r}")
        polygons[da_id] = DAPolygon(da_id=da_id, parts=parts)
    return GeoIndex(polygons=polygons)


def write_geojson(index: GeoIndex, path: str | Path, extra_properties=None) -> None:
    """Write the index back out; single-part DAs become Polygon features.

    extra_properties: optional map da_id -> dict merged into feature properties.
    """
    features = []
    for da_id, poly in index.polygons.items():
        props = {"DAUID": da_id}
        if extra_properties and da_id in extra_properties:
            props.update(extra_properties[da_id])
        if len(poly.parts) == 1:
            geometry = {
                "type": "Polygon",
                "coordinates": [r.tolist() for r in poly.parts[0]],
            }
        else:
            geometry = {
                "type": "MultiPolygon",
                "coordinates": [[r.tolist() for r in part] for part in poly.parts],
            }
        features.append({"type": "Feature", "properties": props, "geometry": geometry})
    doc = {"type": "FeatureCollection", "features": features}
    Path(path).write_text(
        json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n", encoding="utf-8"
    )


def locate(point: tuple[float, float], index: GeoIndex) -> str | None:
    """DA containing the point, or None; containment ties go to the smallest id."""
    lon, lat = point
    if not (np.isfinite(lon) and np.isfinite(lat)):
        raise ValidationError(f"locate: non-finite point ({lon}, {lat})")
    hit = None
    for da_id, poly in index.polygons.items():
        if poly.contains(lon, lat) and (hit is None or da_id < hit):
            hit = da_id
    return hit


class FixtureGeocoder:
    """Deterministic geocoder backed by a JSON object address -> [lon, lat]."""

    def __init__(self, table: dict[str, tuple[float, float]]):
        self.table = {a: (float(p[0]), float(p[1])) for a, p in table.items()}

    @classmethod
    def from_file(cls, path: str | Path) -> "FixtureGeocoder":
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: not valid JSON ({exc})") from exc
        if not isinstance(doc, dict):
            raise ParseError(f"{path}: fixture geocoder file must be a JSON object")
        return cls(doc)

    def resolve(self, address: str) -> tuple[float, float] | None:
        return self.table.get(address)


class HTTPGeocoder:
    """Templated-GET geocoder, configured via environment variables.

    GEOCODER_URL_TEMPLATE must contain {address} and may contain {key};
    lon/lat are pulled from the response JSON by dot paths (list indices
    allowed, e.g. "results.0.lon").
    """

    def __init__(self, url_template: str, api_key: str = "",
                 lon_path: str = "lon", lat_path: str = "lat", timeout: float = 10.0):
        if "{address}" not in url_template:
            raise ConfigError("GEOCODER_URL_TEMPLATE must contain {address}")
        self.url_template = url_template
        self.api_key = api_key
        self.lon_path = lon_path
        self.lat_path = lat_path
        self.timeout = timeout

    @classmethod
    def from_env(cls, env) -> "HTTPGeocoder":
        template = env.get("GEOCODER_URL_TEMPLATE")
        if not template:
            raise ConfigError("GEOCODER_URL_TEMPLATE is not set")
        return cls(template, api_key=env.get("GEOCODER_API_KEY", ""))

    @staticmethod
    def _dig(doc, path: str):
        cur = doc
        for part in path.split("."):
            if isinstance(cur, list):
                cur = cur[int(part)]
            else:
                cur = cur[part]
        return cur

    def resolve(self, address: str) -> tuple[float, float] | None:
        url = self.url_template.format(
            address=urllib.parse.quote(address), key=self.api_key
        )
        try:
            with urllib.request.urlopen(url, timeout=self.timeout) as resp:
                doc = json.loads(resp.read().decode("utf-8"))
        except Exception as exc:
            raise GeocodeClientError(address, str(exc)) from exc
        try:
            lon = float(self._dig(doc, self.lon_path))
            lat = float(self._dig(doc, self.lat_path))
        except (KeyError, IndexError, TypeError, ValueError):
            return None
        return (lon, lat)


def assign_addresses(addresses, client, index: GeoIndex):
    """Count geocoded addresses per DA.

    Returns (counts, rejects): counts maps da_id -> located address count;
    rejects lists addresses that did not resolve or fell outside every DA.
    """
    counts: dict[str, int] = {}
    rejects: list[str] = []
    for address in addresses:
        try:
            point = client.resolve(address)
        except GeocodeClientError:
            raise
        except Exception as exc:
            raise GeocodeClientError(address, str(exc)) from exc
        if point is None:
            rejects.append(address)
            continue
        da_id = locate(point, index)
        if da_id is None:
            rejects.append(address)
        else:
            counts[da_id] = counts.get(da_id, 0) + 1
    return counts, rejects
