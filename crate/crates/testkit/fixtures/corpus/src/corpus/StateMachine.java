package corpus;

public class StateMachine {
    static final int IDLE = 0, RUNNING = 1, PAUSED = 2, DONE = 3;

    int state = IDLE;
    int transitions;

    boolean fire(char event) {
        int next;
        switch (state) {
            case IDLE:
                next = event == 's' ? RUNNING : -1;
                break;
            case RUNNING:
                if (event == 'p') next = PAUSED;
                else if (event == 'f') next = DONE;
                else next = -1;
                break;
            case PAUSED:
                next = event == 'r' ? RUNNING : event == 'f' ? DONE : -1;
                break;
            default:
                next = -1;
        }
        if (next < 0) {
            return false;
        }
        state = next;
        transitions++;
        return true;
    }

    static int run(String events) {
        StateMachine m = new StateMachine();
        for (int i = 0; i < events.length(); i++) {
            if (!m.fire(events.charAt(i))) {
                return -i - 1;
            }
        }
        return m.state;
    }

    static class Turnstile {
        boolean locked = true;
        int coins, pushes;

        void coin() {
            coins++;
            locked = false;
        }

        void push() {
            if (!locked) {
                pushes++;
                locked = true;
            }
        }
    }
}
