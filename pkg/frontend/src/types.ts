// Shapes of the /v1 API payloads this UI consumes. Field names mirror the
// server's JSON exactly; the UI renders these and nothing else.

export interface ApiErrorBody {
  error: { code: string; message: string; detail?: Record<string, unknown> };
}

export interface Contact { kind: string; value: string }

export interface ExperienceEntry {
  title: string;
  organization: string;
  start: string;
  end: string;
  bullets: string[];
}

export interface ParsedResume {
  name: string;
  contacts: Contact[];
  education: { institution: string; credential: string; start: string; end: string }[];
  experience: ExperienceEntry[];
  technical_skills: { name: string; context_snippets: string[] }[];
  soft_skills: { name: string; justification: string }[];
  certifications: string[];
  projects: { name: string; description: string }[];
}

export interface RoleMapping {
  node_id: string;
  similarity: number;
  candidate_role_text: string;
}

export interface AssessedSkill {
  skill_name: string;
  level: string;
  evidence: {
    months_experience: number;
    mention_count: number;
    sources: string[];
    snippets: string[];
  };
}

export interface SkillGap {
  skill_name: string;
  required_level: string;
  current_level: string | null;
  target_role_node_id: string;
  severity: number;
}

export interface SkillReport {
  profile_id: string;
  assessed: AssessedSkill[];
  top_skills: string[];
  gaps: SkillGap[];
  target_role_ids: string[];
}

export interface CourseRecord {
  course_id: string;
  title: string;
  description: string;
  url: string;
  skills_tags: string[];
  outcomes: string[];
}

export interface RecommendedCourse { course: CourseRecord; score: number }

export interface TrackerEntry { course_id: string; status: CourseStatus }

export type CourseStatus = "recommended" | "in_progress" | "completed";

export interface Recommendations {
  query_text: string;
  target_role_title: string;
  no_gaps: boolean;
  courses: RecommendedCourse[];
  course_tracker?: TrackerEntry[];
}

export interface NodeView { node_id: string; title: string; description: string }

export interface CareerPath {
  current_node: NodeView;
  similarity: number;
  immediate: NodeView[];
  advanced: NodeView[];
}

export interface QAQuestion {
  question_id: string;
  text: string;
  role_node_id: string;
  kind: string;
}

export interface QAEntry {
  question: QAQuestion;
  answer: string;
  revision: number;
}

export interface QATranscript {
  session_id: string;
  questions: QAQuestion[];
  entries: QAEntry[];
}

export interface ChatTurn { speaker: "coach" | "candidate"; text: string }

export interface ResumeBundle {
  parsed: ParsedResume;
  mapping: RoleMapping;
  report: SkillReport;
  recommendations: Recommendations;
}

export interface AnswerResponse {
  qa: QATranscript;
  report: SkillReport | null;
  recommendations: Recommendations | null;
}

export interface ProfileDocument {
  profile_id: string;
  display_name: string;
  chat: ChatTurn[];
  qa: QATranscript;
}
