// Client view state: which profile is active, how far along the pipeline
// it is, and the cached payload per endpoint. Stage only moves forward
// along the pipeline; any recalibrating action (new resume, new or revised
// answer) invalidates the caches that derive from candidate facts.

import type { CareerPath, ProfileDocument, QATranscript, Recommendations,
              ResumeBundle, SkillReport } from "./types";

export type Stage = "landing" | "uploaded" | "mapped" | "assessed" | "coached";

const STAGE_ORDER: Stage[] = ["landing", "uploaded", "mapped", "assessed", "coached"];

export interface Caches {
  bundle: ResumeBundle | null;
  careerPath: CareerPath | null;
  report: SkillReport | null;
  recommendations: Recommendations | null;
  qa: QATranscript | null;
  profile: ProfileDocument | null;
}

export class ViewState {
  profileId: string | null = null;
  displayName = "";
  stage: Stage = "landing";
  caches: Caches = {
    bundle: null, careerPath: null, report: null,
    recommendations: null, qa: null, profile: null,
  };
  private listeners: (() => void)[] = [];

  subscribe(listener: () => void): void {
    this.listeners.push(listener);
  }

  notify(): void {
    for (const listener of this.listeners) listener();
  }

  advanceTo(stage: Stage): void {
    if (STAGE_ORDER.indexOf(stage) > STAGE_ORDER.indexOf(this.stage)) {
      this.stage = stage;
    }
  }

  /** A recalibrating action happened: derived payloads are stale. */
  invalidateDerived(): void {
    this.caches.careerPath = null;
    this.caches.report = null;
    this.caches.recommendations = null;
    this.caches.bundle = null;
  }

  reset(profileId: string, displayName: string): void {
    this.profileId = profileId;
    this.displayName = displayName;
    this.stage = "landing";
    this.caches = {
      bundle: null, careerPath: null, report: null,
      recommendations: null, qa: null, profile: null,
    };
  }
}
