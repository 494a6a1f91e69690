import { describe, expect, it } from "vitest";
import { cameraPosition, defaultCamera, orbit, project, zoom } from "../src/camera.js";

describe("camera projection", () => {
  it("puts the look-at target at the canvas center", () => {
    const cam = defaultCamera();
    const s = project(cam, cam.target, 800, 600);
    expect(s.visible).toBe(true);
    expect(s.x).toBeCloseTo(400, 6);
    expect(s.y).toBeCloseTo(300, 6);
  });

  it("marks points behind the eye as invisible", () => {
    const cam = defaultCamera();
    const eye = cameraPosition(cam);
    const behind: [number, number, number] = [
      2 * eye[0] - cam.target[0],
      2 * eye[1] - cam.target[1],
      2 * eye[2] - cam.target[2],
    ];
    expect(project(cam, behind, 800, 600).visible).toBe(false);
  });

  it("projects collinear world points to collinear pixels", () => {
    const cam = defaultCamera();
    const pts: [number, number, number][] = [
      [0, 0, 0.1],
      [0, 0, 0.2],
      [0, 0, 0.3],
    ];
    const s = pts.map((p) => project(cam, p, 800, 600));
    const cross =
      (s[1]!.x - s[0]!.x) * (s[2]!.y - s[0]!.y) - (s[1]!.y - s[0]!.y) * (s[2]!.x - s[0]!.x);
    expect(Math.abs(cross)).toBeLessThan(1e-6 * 800 * 600);
  });

  it("orbit clamps elevation and zoom clamps distance", () => {
    let cam = defaultCamera();
    cam = orbit(cam, 0, 10);
    expect(cam.elevation).toBeLessThan(Math.PI / 2);
    cam = zoom(cam, 1e-9);
    expect(cam.distance).toBeGreaterThan(0);
  });
});
