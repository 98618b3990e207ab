// Lightweight SVG map: region polygon overlays and click-to-set-point.
// Equirectangular projection into a fixed viewbox; pure projection math
// kept separate from DOM assembly so it can be unit-tested.

import type { RegionJson } from "./types.js";

export interface Viewport {
  west: number;
  south: number;
  east: number;
  north: number;
  width: number;
  height: number;
}

const PADDING_FRACTION = 0.1;

export function fitViewport(
  regions: RegionJson[],
  width = 640,
  height = 400,
  extraPoints: { lon: number; lat: number }[] = [],
): Viewport {
  let west = Infinity;
  let south = Infinity;
  let east = -Infinity;
  let north = -Infinity;
  for (const region of regions) {
    for (const ring of region.polygons) {
      for (const [lon, lat] of ring) {
        west = Math.min(west, lon);
        east = Math.max(east, lon);
        south = Math.min(south, lat);
        north = Math.max(north, lat);
      }
    }
  }
  for (const point of extraPoints) {
    west = Math.min(west, point.lon);
    east = Math.max(east, point.lon);
    south = Math.min(south, point.lat);
    north = Math.max(north, point.lat);
  }
  if (!isFinite(west)) {
    west = -130;
    east = -60;
    south = 20;
    north = 50;
  }
  const padLon = Math.max((east - west) * PADDING_FRACTION, 0.5);
  const padLat = Math.max((north - south) * PADDING_FRACTION, 0.5);
  return {
    west: west - padLon,
    east: east + padLon,
    south: south - padLat,
    north: north + padLat,
    width,
    height,
  };
}

export function project(vp: Viewport, lon: number, lat: number): { x: number; y: number } {
  const x = ((lon - vp.west) / (vp.east - vp.west)) * vp.width;
  const y = ((vp.north - lat) / (vp.north - vp.south)) * vp.height;
  return { x, y };
}

export function unproject(vp: Viewport, x: number, y: number): { lon: number; lat: number } {
  const lon = vp.west + (x / vp.width) * (vp.east - vp.west);
  const lat = vp.north - (y / vp.height) * (vp.north - vp.south);
  return { lon, lat };
}

export function ringPath(vp: Viewport, ring: number[][]): string {
  return (
    ring
      .map(([lon, lat], index) => {
        const { x, y } = project(vp, lon, lat);
        return `${index === 0 ? "M" : "L"}${x.toFixed(2)},${y.toFixed(2)}`;
      })
      .join(" ") + " Z"
  );
}

export interface MapOptions {
  regions: RegionJson[];
  point?: { lon: number; lat: number } | null;
  onClick?: (lon: number, lat: number) => void;
  width?: number;
  height?: number;
}

export function renderMap(options: MapOptions): SVGSVGElement {
  const width = options.width ?? 640;
  const height = options.height ?? 400;
  const extra = options.point ? [options.point] : [];
  const vp = fitViewport(options.regions, width, height, extra);
  const svgNs = "http://www.w3.org/2000/svg";
  const svg = document.createElementNS(svgNs, "svg");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("class", "region-map");

  for (const region of options.regions) {
    for (const ring of region.polygons) {
      const path = document.createElementNS(svgNs, "path");
      path.setAttribute("d", ringPath(vp, ring));
      path.setAttribute("class", "region-shape");
      const title = document.createElementNS(svgNs, "title");
      title.textContent = region.name;
      path.appendChild(title);
      svg.appendChild(path);
    }
  }

  if (options.point) {
    const { x, y } = project(vp, options.point.lon, options.point.lat);
    const marker = document.createElementNS(svgNs, "circle");
    marker.setAttribute("cx", x.toFixed(2));
    marker.setAttribute("cy", y.toFixed(2));
    marker.setAttribute("r", "5");
    marker.setAttribute("class", "request-point");
    svg.appendChild(marker);
  }

  if (options.onClick) {
    svg.addEventListener("click", (event) => {
      const rect = svg.getBoundingClientRect();
      const x = ((event.clientX - rect.left) / rect.width) * width;
      const y = ((event.clientY - rect.top) / rect.height) * height;
      const { lon, lat } = unproject(vp, x, y);
      options.onClick!(lon, lat);
    });
  }
  return svg;
}
