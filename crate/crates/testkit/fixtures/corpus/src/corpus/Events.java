package corpus;

public class Events {
    interface Listener {
        void on(String topic, Object payload);
    }

    static class Bus {
        private Listener[] listeners = new Listener[2];
        private int n;

        void subscribe(Listener l) {
            if (n == listeners.length) {
                Listener[] grown = new Listener[n * 2];
                System.arraycopy(listeners, 0, grown, 0, n);
                listeners = grown;
            }
            listeners[n++] = l;
        }

        int publish(String topic, Object payload) {
            int delivered = 0;
            for (int i = 0; i < n; i++) {
                try {
                    listeners[i].on(topic, payload);
                    delivered++;
                } catch (RuntimeException e) {
                    // skip faulty listener
                }
            }
            return delivered;
        }
    }

    static class Recorder implements Listener {
        final StringBuilder log = new StringBuilder();

        public void on(String topic, Object payload) {
            log.append(topic).append('=').append(payload).append(';');
        }
    }

    static class Filter implements Listener {
        final String prefix;
        final Listener next;

        Filter(String prefix, Listener next) {
            this.prefix = prefix;
            this.next = next;
        }

        public void on(String topic, Object payload) {
            if (topic.startsWith(prefix)) next.on(topic, payload);
        }
    }

    static class Faulty implements Listener {
        public void on(String topic, Object payload) {
            throw new IllegalStateException(topic);
        }
    }
}
