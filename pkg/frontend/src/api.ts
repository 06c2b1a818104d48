// Thin typed client for the /v1 API. Every failure becomes an ApiError
// carrying the server's stable code so pages can render a human message;
// transport failures get the synthetic code "network".

import type {
  AnswerResponse, ApiErrorBody, CareerPath, ChatTurn, CourseStatus,
  ProfileDocument, QATranscript, Recommendations, ResumeBundle, SkillReport,
  TrackerEntry,
} from "./types";

export class ApiError extends Error {
  constructor(
    public code: string,
    message: string,
    public status: number,
    public detail?: Record<string, unknown>,
  ) {
    super(message);
  }
}

const MESSAGES: Record<string, string> = {
  network: "Could not reach the server. Check your connection and retry.",
  unknown_profile: "That profile does not exist.",
  unknown_course: "That course was never recommended to you.",
  unknown_question: "That question is not part of your session.",
  unmappable_role: "We could not match your resume to a role. Answer the questionnaire to pick one.",
  no_mapping_yet: "Upload a resume (or pick a role in the Q&A) first.",
  no_report_yet: "No skill report yet. Upload a resume first.",
  illegal_transition: "That course status change is not allowed.",
  empty_document: "That file is empty.",
  unreadable_document: "We could not read that file. PDF or plain text only.",
  empty_text: "Please write a message first.",
  upload_too_large: "That file is too large (10 MB limit).",
  invalid_body: "The form is incomplete.",
  provider_unavailable: "The coaching model is unavailable right now. Retry in a moment.",
  schema_violation: "The coaching model misbehaved. Retry in a moment.",
};

export function humanMessage(error: ApiError): string {
  return MESSAGES[error.code] ?? error.message ?? "Something went wrong.";
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(`${this.baseUrl}/v1${path}`, init);
    } catch (cause) {
      throw new ApiError("network", String(cause), 0);
    }
    const body = await response.json().catch(() => null);
    if (!response.ok) {
      const fault = (body as ApiErrorBody | null)?.error;
      throw new ApiError(fault?.code ?? `http_${response.status}`,
        fault?.message ?? response.statusText, response.status, fault?.detail);
    }
    return body as T;
  }

  private json(payload: unknown): RequestInit {
    return {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    };
  }

  createProfile(displayName: string): Promise<{ profile_id: string }> {
    return this.request("/profiles", this.json({ display_name: displayName }));
  }

  getProfile(profileId: string): Promise<ProfileDocument> {
    return this.request(`/profiles/${profileId}`);
  }

  uploadResume(profileId: string, file: File | Blob, name: string): Promise<ResumeBundle> {
    const form = new FormData();
    form.append("file", file, name);
    return this.request(`/profiles/${profileId}/resume`, { method: "POST", body: form });
  }

  careerPath(profileId: string): Promise<CareerPath> {
    return this.request(`/profiles/${profileId}/career-path`);
  }

  skillReport(profileId: string): Promise<SkillReport> {
    return this.request(`/profiles/${profileId}/skill-report`);
  }

  recommendations(profileId: string): Promise<Recommendations> {
    return this.request(`/profiles/${profileId}/recommendations`);
  }

  questions(profileId: string): Promise<QATranscript> {
    return this.request(`/profiles/${profileId}/qa`);
  }

  answer(profileId: string, questionId: string, answer: string): Promise<AnswerResponse> {
    return this.request(`/profiles/${profileId}/qa`,
      this.json({ question_id: questionId, answer }));
  }

  chat(profileId: string, text: string): Promise<{ turn: ChatTurn }> {
    return this.request(`/profiles/${profileId}/chat`, this.json({ text }));
  }

  setCourseStatus(profileId: string, courseId: string,
                  status: CourseStatus): Promise<TrackerEntry> {
    return this.request(`/profiles/${profileId}/courses/${courseId}/status`, {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ status }),
    });
  }
}
