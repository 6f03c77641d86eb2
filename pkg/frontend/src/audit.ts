// Dev-mode audit trail: every risk level shown in the UI is recorded with
// its provenance.  The client itself never computes a level, so a healthy
// session contains zero "client" entries; the badge in the corner and the
// tests both assert that.

import type { RiskLevel } from "./types.js";

export type LevelOrigin = "server" | "client";

export interface AuditEntry {
  at: number;
  subject: string; // pedestrian id or zone label
  level: RiskLevel;
  origin: LevelOrigin;
  endpoint: string;
}

export class AuditLog {
  private rows: AuditEntry[] = [];

  record(subject: string, level: RiskLevel, origin: LevelOrigin, endpoint: string): void {
    this.rows.push({ at: Date.now(), subject, level, origin, endpoint });
  }

  entries(): readonly AuditEntry[] {
    return this.rows;
  }

  locallyComputedCount(): number {
    return this.rows.filter((row) => row.origin === "client").length;
  }

  clear(): void {
    this.rows = [];
  }
}
