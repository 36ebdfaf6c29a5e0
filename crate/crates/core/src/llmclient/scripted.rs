use super::{non_empty, LlmBackend, LlmError, LlmRequest};
use std::collections::{BTreeMap, VecDeque};
use std::sync::Mutex;

#[derive(Default)]
struct ScriptState {
    global: VecDeque<String>,
    by_stage: BTreeMap<String, VecDeque<String>>,
    calls: BTreeMap<String, usize>,
    requests: Vec<LlmRequest>,
    served: usize,
}

/// Returns pre-set responses in order, either from one global queue or
/// from per-stage queues keyed by `stage_tag`. Every request is recorded.
#[derive(Default)]
pub struct ScriptedBackend {
    state: Mutex<ScriptState>,
}

impl ScriptedBackend {
    pub fn new<I, S>(responses: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let b = ScriptedBackend::default();
        b.state.lock().unwrap().global = responses.into_iter().map(Into::into).collect();
        b
    }

    /// Adds responses for one stage; stage queues take precedence over the
    /// global queue.
    pub fn with_stage<I, S>(self, stage_tag: &str, responses: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.state
            .lock()
            .unwrap()
            .by_stage
            .entry(stage_tag.to_string())
            .or_default()
            .extend(responses.into_iter().map(Into::into));
        self
    }

    pub fn calls(&self, stage_tag: &str) -> usize {
        self.state.lock().unwrap().calls.get(stage_tag).copied().unwrap_or(0)
    }

    pub fn total_calls(&self) -> usize {
        self.state.lock().unwrap().calls.values().sum()
    }

    pub fn requests(&self) -> Vec<LlmRequest> {
        self.state.lock().unwrap().requests.clone()
    }

    pub fn remaining(&self) -> usize {
        let st = self.state.lock().unwrap();
        st.global.len() + st.by_stage.values().map(VecDeque::len).sum::<usize>()
    }
}

impl LlmBackend for ScriptedBackend {
    fn complete(&self, request: &LlmRequest) -> Result<String, LlmError> {
        request.validate()?;
        let mut st = self.state.lock().unwrap();
        *st.calls.entry(request.stage_tag.clone()).or_default() += 1;
        st.requests.push(request.clone());
        let next = match st.by_stage.get_mut(&request.stage_tag).and_then(VecDeque::pop_front) {
            Some(r) => Some(r),
            None => st.global.pop_front(),
        };
        match next {
            Some(r) => {
                st.served += 1;
                non_empty(r)
            }
            None => Err(LlmError::ScriptExhausted { served: st.served }),
        }
    }
}

/// Answers each request with a closure, so responses can depend on the
/// prompt rather than on call order.
pub struct FnBackend<F>(pub F);

impl<F> LlmBackend for FnBackend<F>
where
    F: Fn(&LlmRequest) -> Result<String, LlmError> + Send + Sync,
{
    fn complete(&self, request: &LlmRequest) -> Result<String, LlmError> {
        request.validate()?;
        non_empty((self.0)(request)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn global_order_then_exhaustion() {
        let b = ScriptedBackend::new(["a", "b"]);
        let r = LlmRequest::new("m", "p", "s");
        assert_eq!(b.complete(&r).unwrap(), "a");
        assert_eq!(b.complete(&r).unwrap(), "b");
        assert_eq!(b.complete(&r), Err(LlmError::ScriptExhausted { served: 2 }));
        assert_eq!(b.calls("s"), 3);
    }

    #[test]
    fn stage_queues_take_precedence() {
        let b = ScriptedBackend::new(["g"]).with_stage("name_suggestion", ["testFoo"]);
        let n = LlmRequest::new("m", "p", "name_suggestion");
        let p = LlmRequest::new("m", "p", "post_process");
        assert_eq!(b.complete(&n).unwrap(), "testFoo");
        assert_eq!(b.complete(&n).unwrap(), "g");
        assert!(b.complete(&p).is_err());
        assert_eq!(b.calls("name_suggestion"), 2);
        assert_eq!(b.calls("post_process"), 1);
        assert_eq!(b.requests().len(), 3);
    }

    #[test]
    fn fn_backend_answers_by_prompt() {
        let b = FnBackend(|r: &LlmRequest| Ok(r.prompt.to_uppercase()));
        assert_eq!(b.complete(&LlmRequest::new("m", "abc", "s")).unwrap(), "ABC");
        let empty = FnBackend(|_: &LlmRequest| Ok(String::new()));
        assert_eq!(empty.complete(&LlmRequest::new("m", "abc", "s")), Err(LlmError::EmptyResponse));
    }

    #[test]
    fn blank_script_entry_is_an_empty_response() {
        let b = ScriptedBackend::new([" \n"]);
        assert_eq!(b.complete(&LlmRequest::new("m", "p", "s")), Err(LlmError::EmptyResponse));
    }
}
