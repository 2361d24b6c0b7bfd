import type { ConstraintKind, QueryBody } from "./types.js";

// Every drop-down offers "any", which simply omits the literal from the
// wire body.  The form can only express requests the query endpoint
// accepts, so the mapping below is total over valid form states.
export const ANY = "any";

export interface QueryFormState {
  startLane: string;
  startRelation: string;
  endLane: string;
  endRelation: string;
  constraintKind: ConstraintKind | "none";
  constraintPred: string;
  constraintIntoPred: string;
}

export function emptyForm(): QueryFormState {
  return {
    startLane: ANY,
    startRelation: ANY,
    endLane: ANY,
    endRelation: ANY,
    constraintKind: "none",
    constraintPred: ANY,
    constraintIntoPred: ANY,
  };
}

function literals(...selections: string[]): string[] {
  return selections.filter((s) => s !== ANY && s !== "");
}

export function formIsValid(form: QueryFormState): string | null {
  if (form.constraintKind === "none") {
    return null;
  }
  if (form.constraintPred === ANY || form.constraintPred === "") {
    return "pick a constraint predicate";
  }
  if (form.constraintKind === "changes_into") {
    if (form.constraintIntoPred === ANY || form.constraintIntoPred === "") {
      return "pick the predicate it changes into";
    }
    if (form.constraintIntoPred === form.constraintPred) {
      return "the two constraint predicates must differ";
    }
  }
  return null;
}

export function buildRequest(form: QueryFormState): QueryBody {
  const problem = formIsValid(form);
  if (problem !== null) {
    throw new Error(problem);
  }
  let constraint: QueryBody["constraint"] = null;
  if (form.constraintKind !== "none") {
    constraint = {
      kind: form.constraintKind,
      c: [form.constraintPred],
    };
    if (form.constraintKind === "changes_into") {
      constraint.c_prime = [form.constraintIntoPred];
    }
  }
  return {
    start: literals(form.startLane, form.startRelation),
    end: literals(form.endLane, form.endRelation),
    constraint,
  };
}
