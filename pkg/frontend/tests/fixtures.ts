// Fixture payloads for the UI tests. The resume bundle is the repo's
// committed golden end-to-end bundle; career path and questionnaire
// payloads are assembled from the same authored data files, so every
// field rendered in tests traces back to server-shaped data.

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import type { CareerPath, ChatTurn, QATranscript, ResumeBundle } from "../src/types";

const here = dirname(fileURLToPath(import.meta.url));
const repoRoot = join(here, "..", "..");

function readJson(path: string) {
  return JSON.parse(readFileSync(join(repoRoot, path), "utf-8"));
}

export const goldenBundle: ResumeBundle = readJson(
  "tests/fixtures/golden_bundle.json");

interface TreeNode {
  node_id: string;
  title: string;
  description: string;
  next_positions: string[];
  second_jump_positions: string[];
}

const tree = readJson("data/career_tree.json") as { nodes: TreeNode[] };
const nodesById = new Map(tree.nodes.map((node) => [node.node_id, node]));

function nodeView(nodeId: string) {
  const node = nodesById.get(nodeId)!;
  return { node_id: node.node_id, title: node.title,
           description: node.description };
}

const current = nodesById.get(goldenBundle.mapping.node_id)!;

export const careerPath: CareerPath = {
  current_node: nodeView(current.node_id),
  similarity: goldenBundle.mapping.similarity,
  immediate: current.next_positions.map(nodeView),
  advanced: current.second_jump_positions
    .filter((id) => !current.next_positions.includes(id))
    .map(nodeView),
};

export const questionnaire: QATranscript = {
  session_id: "p-000001-qa",
  questions: [
    { question_id: "q1", role_node_id: current.node_id, kind: "aspiration",
      text: "Are you aiming for a senior engineering role next, or exploring other tracks?" },
    { question_id: "q2", role_node_id: current.node_id, kind: "skill_probe",
      text: "How comfortable are you designing a service end to end without guidance?" },
    { question_id: "q3", role_node_id: current.node_id, kind: "skill_probe",
      text: "How deep is your operational experience with Kubernetes?" },
    { question_id: "q4", role_node_id: current.node_id, kind: "skill_probe",
      text: "Have you mentored or onboarded other engineers?" },
    { question_id: "q5", role_node_id: current.node_id, kind: "preference",
      text: "Do you learn best from courses, documentation, or pairing?" },
  ],
  entries: [],
};

export const chatTranscript: ChatTurn[] = [
  { speaker: "coach",
    text: "Hi Jordan, I'm your career coach. I've read your resume and your skill report, so feel free to ask about your path, your gaps, or the courses I recommended." },
  { speaker: "candidate", text: "What should I learn first?" },
  { speaker: "coach", text: "Start with the system design course, then kubernetes." },
];

export const trackerFromBundle = () =>
  goldenBundle.recommendations.courses.map(({ course }) => ({
    course_id: course.course_id,
    status: "recommended" as const,
  }));
