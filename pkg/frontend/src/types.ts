// Wire types mirroring the parkrisk server API.

export type Gaze = "left" | "center" | "right" | "unknown";

export type RiskLevel = "very_low" | "low" | "moderate" | "high" | "very_high";

export interface ZonePayload {
  label: string;
  risk: RiskLevel;
  color: string;
  hex: string;
  vertices: [number, number][];
}

export interface ZonesResponse {
  gaze: Gaze;
  zones: ZonePayload[];
}

export interface Assessment {
  t: number;
  ped: string;
  x: number;
  y: number;
  zone: string;
  dist: number;
  ttc: number;
  risk: RiskLevel;
  color: string;
}

export interface FrameMessage {
  t: number;
  gaze: Gaze;
  scene_risk: RiskLevel;
  assessments: Assessment[];
}

export interface ScenePedestrian {
  id: string;
  x: number;
  y: number;
}

export interface SceneRequest {
  pedestrians: ScenePedestrian[];
  gaze: Gaze;
  reversing?: boolean;
}

export interface ConfigResponse {
  config: Record<string, unknown>;
  colors: Record<RiskLevel, [string, string]>;
}
