// Application wiring: navigation, cache-aware fetching, and the handlers
// that connect page events to the API client and the view state.
//
// Recalibration contract: submitting or revising a Q&A answer invalidates
// the derived caches and performs exactly one refetch cycle (one GET of
// the skill report, one GET of the recommendations). The tracker blocks
// illegal moves client-side and, if the server still vetoes a move (say,
// from a stale tab), renders the server's verdict instead of the change.

import { ApiClient, ApiError, humanMessage } from "./api";
import { legalMove, renderCareerPath, renderChat, renderError, renderLanding,
         renderQa, renderRecommendations, renderSkillReport,
         renderUpload } from "./pages";
import { ViewState } from "./state";
import type { ChatTurn, CourseStatus, TrackerEntry } from "./types";

export type PageName = "landing" | "upload" | "career-path" | "skill-report"
  | "recommendations" | "qa" | "chat";

export const PAGES: { name: PageName; label: string }[] = [
  { name: "landing", label: "Profile" },
  { name: "upload", label: "Resume" },
  { name: "career-path", label: "Career path" },
  { name: "skill-report", label: "Skill report" },
  { name: "recommendations", label: "Courses" },
  { name: "qa", label: "Q&A" },
  { name: "chat", label: "Chat" },
];

export class App {
  state = new ViewState();
  page: PageName = "landing";
  notice: { code: string; message: string } | null = null;
  chatTurns: ChatTurn[] = [];
  tracker: TrackerEntry[] = [];
  private retry: (() => void) | null = null;

  constructor(
    private api: ApiClient,
    private root: HTMLElement,
  ) {
    this.state.subscribe(() => this.render());
  }

  // --- data loading ---------------------------------------------------------

  private fail(error: unknown, retry?: () => void): void {
    if (error instanceof ApiError) {
      this.notice = { code: error.code, message: humanMessage(error) };
      this.retry = error.code === "network" && retry ? retry : null;
    } else {
      this.notice = { code: "internal", message: "Something went wrong." };
      this.retry = null;
    }
    this.render();
  }

  private clearNotice(): void {
    this.notice = null;
    this.retry = null;
  }

  async createProfile(displayName: string): Promise<void> {
    if (!displayName) return;
    try {
      const { profile_id } = await this.api.createProfile(displayName);
      this.state.reset(profile_id, displayName);
      this.clearNotice();
      this.show("upload");
    } catch (error) {
      this.fail(error, () => this.createProfile(displayName));
    }
  }

  async uploadResume(file: File): Promise<void> {
    const profileId = this.state.profileId;
    if (!profileId) return;
    try {
      this.state.invalidateDerived();
      const bundle = await this.api.uploadResume(profileId, file, file.name);
      this.state.caches.bundle = bundle;
      this.state.caches.report = bundle.report;
      this.state.caches.recommendations = bundle.recommendations;
      this.state.advanceTo("assessed");
      this.clearNotice();
      this.show("career-path");
    } catch (error) {
      if (error instanceof ApiError && error.code === "unmappable_role") {
        // resume parsed but no role matched: the questionnaire is the way on
        this.state.advanceTo("uploaded");
        await this.show("qa");
        this.notice = { code: error.code, message: humanMessage(error) };
        this.render();
        return;
      }
      this.fail(error, () => this.uploadResume(file));
    }
  }

  /** The one refetch cycle after any recalibrating answer. */
  async refetchAfterRecalibration(): Promise<void> {
    const profileId = this.state.profileId!;
    const [report, recommendations] = await Promise.all([
      this.api.skillReport(profileId),
      this.api.recommendations(profileId),
    ]);
    this.state.caches.report = report;
    this.state.caches.recommendations = recommendations;
    this.tracker = recommendations.course_tracker ?? this.tracker;
    this.state.caches.careerPath = null; // mapping may have changed
  }

  async submitAnswer(questionId: string, answer: string): Promise<void> {
    const profileId = this.state.profileId;
    if (!profileId) return;
    try {
      const response = await this.api.answer(profileId, questionId, answer);
      this.state.caches.qa = response.qa;
      this.state.invalidateDerived();
      await this.refetchAfterRecalibration();
      this.state.advanceTo("assessed");
      this.clearNotice();
      this.render();
    } catch (error) {
      this.fail(error, () => this.submitAnswer(questionId, answer));
    }
  }

  async setCourseStatus(courseId: string, status: CourseStatus,
                        opts: { force?: boolean } = {}): Promise<void> {
    const profileId = this.state.profileId;
    if (!profileId) return;
    const current = this.tracker.find((e) => e.course_id === courseId)
      ?.status ?? "recommended";
    if (!opts.force && !legalMove(current, status)) {
      this.notice = {
        code: "illegal_transition",
        message: `A ${current.replace("_", " ")} course cannot move to ` +
          `${status.replace("_", " ")}.`,
      };
      this.render();
      return;
    }
    try {
      const entry = await this.api.setCourseStatus(profileId, courseId, status);
      const existing = this.tracker.find((e) => e.course_id === courseId);
      if (existing) existing.status = entry.status;
      else this.tracker.push(entry);
      this.clearNotice();
      this.render();
    } catch (error) {
      // reconcile with the server's verdict
      this.fail(error);
    }
  }

  async sendChat(text: string): Promise<void> {
    const profileId = this.state.profileId;
    if (!profileId) return;
    try {
      this.chatTurns.push({ speaker: "candidate", text });
      this.render();
      const { turn } = await this.api.chat(profileId, text);
      this.chatTurns.push(turn);
      this.state.advanceTo("coached");
      this.clearNotice();
      this.render();
    } catch (error) {
      this.fail(error, () => this.sendChat(text));
    }
  }

  private async ensurePageData(page: PageName): Promise<void> {
    const profileId = this.state.profileId;
    if (!profileId) return;
    const caches = this.state.caches;
    if (page === "career-path" && !caches.careerPath) {
      caches.careerPath = await this.api.careerPath(profileId);
      this.state.advanceTo("mapped");
    } else if (page === "skill-report" && !caches.report) {
      caches.report = await this.api.skillReport(profileId);
      this.state.advanceTo("assessed");
    } else if (page === "recommendations" && !caches.recommendations) {
      caches.recommendations = await this.api.recommendations(profileId);
      this.tracker = caches.recommendations.course_tracker ?? [];
    } else if (page === "qa" && !caches.qa) {
      caches.qa = await this.api.questions(profileId);
    } else if (page === "chat" && !caches.profile) {
      caches.profile = await this.api.getProfile(profileId);
      this.chatTurns = caches.profile.chat;
    }
    if (page === "recommendations" && caches.recommendations?.course_tracker) {
      this.tracker = caches.recommendations.course_tracker;
    }
  }

  async show(page: PageName): Promise<void> {
    this.page = page;
    try {
      await this.ensurePageData(page);
      this.clearNotice();
    } catch (error) {
      this.fail(error, () => this.show(page));
    }
    this.render();
  }

  // --- rendering ------------------------------------------------------------

  private currentPage(): HTMLElement {
    const caches = this.state.caches;
    switch (this.page) {
      case "landing":
        return renderLanding({ onCreate: (name) => this.createProfile(name) });
      case "upload":
        return renderUpload({ onUpload: (file) => this.uploadResume(file) });
      case "career-path":
        return caches.careerPath
          ? renderCareerPath(caches.careerPath)
          : renderError("no_mapping_yet", "Upload a resume first.");
      case "skill-report":
        return caches.report
          ? renderSkillReport(caches.report)
          : renderError("no_report_yet", "Upload a resume first.");
      case "recommendations":
        return caches.recommendations
          ? renderRecommendations(caches.recommendations, this.tracker, {
              onStatusChange: (courseId, status) =>
                this.setCourseStatus(courseId, status),
            })
          : renderError("no_report_yet", "Upload a resume first.");
      case "qa":
        return caches.qa
          ? renderQa(caches.qa, {
              onAnswer: (questionId, answer) =>
                this.submitAnswer(questionId, answer),
            })
          : renderError("no_report_yet", "Create a profile first.");
      case "chat":
        return renderChat(this.chatTurns, { onSend: (text) => this.sendChat(text) });
    }
  }

  render(): void {
    this.root.replaceChildren();
    const nav = document.createElement("nav");
    for (const { name, label } of PAGES) {
      const button = document.createElement("button");
      button.textContent = label;
      button.dataset.nav = name;
      if (name === this.page) button.classList.add("active");
      button.addEventListener("click", () => this.show(name));
      nav.append(button);
    }
    this.root.append(nav);
    if (this.notice) {
      this.root.append(renderError(this.notice.code, this.notice.message,
        this.retry ?? undefined));
    }
    this.root.append(this.currentPage());
  }
}
