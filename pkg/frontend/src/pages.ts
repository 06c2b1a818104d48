// Pure page renderers: payload in, DOM out. Nothing here invents data —
// every skill, role, and course string comes from an API payload field,
// which the snapshot tests enforce.

import type { CareerPath, ChatTurn, CourseStatus, NodeView, QATranscript,
              Recommendations, SkillReport, TrackerEntry } from "./types";

type Child = Node | string;

export function h(tag: string, attrs: Record<string, string> = {},
                  ...children: Child[]): HTMLElement {
  const element = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    element.setAttribute(key, value);
  }
  for (const child of children) {
    element.append(child instanceof Node ? child : document.createTextNode(child));
  }
  return element;
}

export interface LandingHandlers {
  onCreate(displayName: string): void;
}

export function renderLanding(handlers: LandingHandlers): HTMLElement {
  const input = h("input", {
    type: "text", placeholder: "Your name",
    "data-testid": "display-name",
  }) as HTMLInputElement;
  const button = h("button", { "data-testid": "create-profile" },
    "Create my profile");
  button.addEventListener("click", () => handlers.onCreate(input.value.trim()));
  return h("section", { class: "page", "data-testid": "page-landing" },
    h("h2", {}, "Welcome"),
    h("p", {}, "Set up your profile to get a career path, a skill report, " +
      "and course recommendations from your resume."),
    input, button);
}

export interface UploadHandlers {
  onUpload(file: File): void;
}

export function renderUpload(handlers: UploadHandlers): HTMLElement {
  const input = h("input", {
    type: "file", accept: ".pdf,.txt", "data-testid": "resume-file",
  }) as HTMLInputElement;
  const button = h("button", { "data-testid": "upload-resume" }, "Upload resume");
  button.addEventListener("click", () => {
    const file = input.files?.[0];
    if (file) handlers.onUpload(file);
  });
  return h("section", { class: "page", "data-testid": "page-upload" },
    h("h2", {}, "Upload your resume"),
    h("p", {}, "PDF or plain text. We parse it, place you on the career " +
      "tree, and score your skills."),
    input, button);
}

function nodeCard(node: NodeView): HTMLElement {
  return h("div", { class: "card", "data-node-id": node.node_id },
    h("h4", {}, node.title),
    h("p", {}, node.description));
}

export function renderCareerPath(path: CareerPath): HTMLElement {
  return h("section", { class: "page", "data-testid": "page-career-path" },
    h("h2", {}, "Your career path"),
    h("h3", {}, "Where you are"),
    nodeCard(path.current_node),
    h("h3", {}, "Next positions"),
    ...(path.immediate.length
      ? path.immediate.map(nodeCard)
      : [h("p", { class: "empty" }, "No further steps on this track.")]),
    h("h3", {}, "Further ahead"),
    ...(path.advanced.length
      ? path.advanced.map(nodeCard)
      : [h("p", { class: "empty" }, "Nothing beyond the next step yet.")]));
}

export function renderSkillReport(report: SkillReport): HTMLElement {
  const topRows = report.assessed
    .filter((a) => report.top_skills.includes(a.skill_name))
    .map((a) => h("tr", {},
      h("td", {}, a.skill_name),
      h("td", {}, a.level),
      h("td", {}, String(a.evidence.months_experience))));
  const gapRows = report.gaps.map((gap) => h("tr", { "data-gap": gap.skill_name },
    h("td", {}, gap.skill_name),
    h("td", {}, gap.required_level),
    h("td", {}, gap.current_level ?? "not evidenced"),
    h("td", {}, String(gap.severity))));
  return h("section", { class: "page", "data-testid": "page-skill-report" },
    h("h2", {}, "Your skill report"),
    h("h3", {}, "Top skills"),
    h("table", { "data-testid": "top-skills" },
      h("thead", {}, h("tr", {}, h("th", {}, "Skill"), h("th", {}, "Level"),
        h("th", {}, "Months"))),
      h("tbody", {}, ...topRows)),
    h("h3", {}, "Gaps toward your next role"),
    report.gaps.length
      ? h("table", { "data-testid": "gaps" },
          h("thead", {}, h("tr", {}, h("th", {}, "Skill"),
            h("th", {}, "Required"), h("th", {}, "You"),
            h("th", {}, "Severity"))),
          h("tbody", {}, ...gapRows))
      : h("p", { class: "empty", "data-testid": "no-gaps" },
          "No gaps - you already meet the bar for the next role."));
}

export interface TrackerHandlers {
  onStatusChange(courseId: string, status: CourseStatus): void;
}

// which moves the tracker offers, mirroring the server's legal transitions
const NEXT_MOVES: Record<CourseStatus, CourseStatus[]> = {
  recommended: ["in_progress", "completed"],
  in_progress: ["completed"],
  completed: [],
};

export const STATUS_LABELS: Record<CourseStatus, string> = {
  recommended: "Recommended",
  in_progress: "In progress",
  completed: "Completed",
};

export function legalMove(from: CourseStatus, to: CourseStatus): boolean {
  return NEXT_MOVES[from].includes(to);
}

export function renderRecommendations(recs: Recommendations,
                                      tracker: TrackerEntry[],
                                      handlers: TrackerHandlers): HTMLElement {
  if (recs.no_gaps) {
    return h("section", { class: "page", "data-testid": "page-recommendations" },
      h("h2", {}, "Course recommendations"),
      h("p", { class: "empty", "data-testid": "no-gap-congrats" },
        "Congratulations - no skill gaps stand between you and your next " +
        "role, so there is nothing to study up on."));
  }
  const statusOf = (courseId: string): CourseStatus =>
    tracker.find((entry) => entry.course_id === courseId)?.status ?? "recommended";

  const cards = recs.courses.map(({ course, score }) => {
    const status = statusOf(course.course_id);
    const buttons = NEXT_MOVES[status].map((target) => {
      const button = h("button", {
        "data-testid": `move-${course.course_id}-${target}`,
      }, STATUS_LABELS[target]);
      button.addEventListener("click",
        () => handlers.onStatusChange(course.course_id, target));
      return button;
    });
    return h("div", { class: "card", "data-course-id": course.course_id },
      h("h4", {}, course.title),
      h("p", {}, course.description),
      h("ul", {}, ...course.outcomes.map((outcome) => h("li", {}, outcome))),
      h("a", { href: course.url }, course.url),
      h("p", { class: "score" }, `match ${score.toFixed(3)}`),
      h("span", { class: `status status-${status}`,
                  "data-testid": `status-${course.course_id}` },
        STATUS_LABELS[status]),
      ...buttons);
  });
  return h("section", { class: "page", "data-testid": "page-recommendations" },
    h("h2", {}, "Course recommendations"),
    h("p", { class: "query" }, recs.query_text),
    ...cards);
}

export interface QaHandlers {
  onAnswer(questionId: string, answer: string): void;
}

export function renderQa(qa: QATranscript, handlers: QaHandlers): HTMLElement {
  const latest = new Map<string, { answer: string; revision: number }>();
  for (const entry of qa.entries) {
    const current = latest.get(entry.question.question_id);
    if (!current || entry.revision > current.revision) {
      latest.set(entry.question.question_id,
        { answer: entry.answer, revision: entry.revision });
    }
  }
  const blocks = qa.questions.map((question) => {
    const existing = latest.get(question.question_id);
    const input = h("textarea", {
      "data-testid": `answer-${question.question_id}`,
    }) as HTMLTextAreaElement;
    if (existing) input.value = existing.answer;
    const button = h("button", {
      "data-testid": `submit-${question.question_id}`,
    }, existing ? "Revise answer" : "Answer");
    button.addEventListener("click", () => {
      if (input.value.trim()) handlers.onAnswer(question.question_id, input.value);
    });
    const children: Child[] = [
      h("p", { class: "question" }, question.text), input, button];
    if (existing) {
      children.push(h("span", {
        class: "revisions",
        "data-testid": `revision-${question.question_id}`,
      }, `revision ${existing.revision}`));
    }
    return h("div", { class: "card", "data-question-id": question.question_id },
      ...children);
  });
  return h("section", { class: "page", "data-testid": "page-qa" },
    h("h2", {}, "Tell us more"),
    h("p", {}, "Your answers refine your skill report and your course " +
      "recommendations immediately."),
    ...blocks);
}

export interface ChatHandlers {
  onSend(text: string): void;
}

export function renderChat(turns: ChatTurn[], handlers: ChatHandlers): HTMLElement {
  const log = h("div", { class: "chat-log", "data-testid": "chat-log" },
    ...turns.map((turn) => h("p", { class: `turn turn-${turn.speaker}` },
      h("strong", {}, turn.speaker === "coach" ? "Coach" : "You"),
      ": ", turn.text)));
  const input = h("input", {
    type: "text", placeholder: "Ask your coach anything",
    "data-testid": "chat-input",
  }) as HTMLInputElement;
  const button = h("button", { "data-testid": "chat-send" }, "Send");
  button.addEventListener("click", () => {
    if (input.value.trim()) handlers.onSend(input.value);
  });
  return h("section", { class: "page", "data-testid": "page-chat" },
    h("h2", {}, "Chat with your coach"),
    log, input, button);
}

export function renderError(code: string, message: string,
                            onRetry?: () => void): HTMLElement {
  const children: Child[] = [
    h("p", { class: "error-message", "data-error-code": code }, message)];
  if (onRetry) {
    const button = h("button", { "data-testid": "retry" }, "Retry");
    button.addEventListener("click", onRetry);
    children.push(button);
  }
  return h("div", { class: "error", "data-testid": "error" }, ...children);
}
