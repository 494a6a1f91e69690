// Minimal orbit camera and perspective projection: enough 3D for a
// backbone polyline without pulling in a scene-graph library.

import type { Vec3 } from "./protocol.js";

export interface Camera {
  target: Vec3;
  distance: number;
  azimuth: number; // radians around the world z-axis
  elevation: number; // radians above the x-y plane
  fov: number;
}

export function defaultCamera(): Camera {
  return { target: [0, 0, 0.3], distance: 0.65, azimuth: -1.1, elevation: 0.35, fov: 40 };
}

export function cameraPosition(cam: Camera): Vec3 {
  const ce = Math.cos(cam.elevation);
  return [
    cam.target[0] + cam.distance * ce * Math.cos(cam.azimuth),
    cam.target[1] + cam.distance * ce * Math.sin(cam.azimuth),
    cam.target[2] + cam.distance * Math.sin(cam.elevation),
  ];
}

function sub(a: Vec3, b: Vec3): Vec3 {
  return [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
}

function cross(a: Vec3, b: Vec3): Vec3 {
  return [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
}

function norm(a: Vec3): number {
  return Math.hypot(a[0], a[1], a[2]);
}

function unit(a: Vec3): Vec3 {
  const n = norm(a) || 1;
  return [a[0] / n, a[1] / n, a[2] / n];
}

function dot(a: Vec3, b: Vec3): number {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

export interface Projected {
  x: number;
  y: number;
  depth: number;
  visible: boolean;
}

/**
 * Projects a world point to canvas pixels. The camera looks at its target
 * with the world z-axis as the up reference.
 */
export function project(cam: Camera, p: Vec3, width: number, height: number): Projected {
  const eye = cameraPosition(cam);
  const forward = unit(sub(cam.target, eye));
  let right = cross(forward, [0, 0, 1]);
  if (norm(right) < 1e-9) right = [1, 0, 0];
  right = unit(right);
  const up = cross(right, forward);
  const rel = sub(p, eye);
  const zc = dot(rel, forward);
  if (zc <= 1e-6) return { x: 0, y: 0, depth: zc, visible: false };
  const f = (0.5 * height) / Math.tan((cam.fov * Math.PI) / 360);
  return {
    x: width / 2 + (f * dot(rel, right)) / zc,
    y: height / 2 - (f * dot(rel, up)) / zc,
    depth: zc,
    visible: true,
  };
}

export function orbit(cam: Camera, dAz: number, dEl: number): Camera {
  const lim = Math.PI / 2 - 0.05;
  return {
    ...cam,
    azimuth: cam.azimuth + dAz,
    elevation: Math.min(lim, Math.max(-lim, cam.elevation + dEl)),
  };
}

export function zoom(cam: Camera, factor: number): Camera {
  return { ...cam, distance: Math.min(5, Math.max(0.05, cam.distance * factor)) };
}
