package corpus;

public class Lists {
    static class Node {
        int value;
        Node next;

        Node(int v, Node n) {
            value = v;
            next = n;
        }
    }

    static class IntList {
        Node head;
        int size;

        void push(int v) {
            head = new Node(v, head);
            size++;
        }

        int pop() {
            if (head == null) {
                throw new IllegalStateException("empty");
            }
            int v = head.value;
            head = head.next;
            size--;
            return v;
        }

        boolean contains(int v) {
            for (Node n = head; n != null; n = n.next) {
                if (n.value == v) return true;
            }
            return false;
        }

        void reverse() {
            Node prev = null, cur = head;
            while (cur != null) {
                Node nx = cur.next;
                cur.next = prev;
                prev = cur;
                cur = nx;
            }
            head = prev;
        }

        int[] toArray() {
            int[] out = new int[size];
            int i = 0;
            for (Node n = head; n != null; n = n.next) {
                out[i++] = n.value;
            }
            return out;
        }
    }

    static class Deque {
        private Object[] items = new Object[4];
        private int head, tail, count;

        void addLast(Object o) {
            if (count == items.length) grow();
            items[tail] = o;
            tail = (tail + 1) % items.length;
            count++;
        }

        Object removeFirst() {
            if (count == 0) return null;
            Object o = items[head];
            items[head] = null;
            head = (head + 1) % items.length;
            count--;
            return o;
        }

        private void grow() {
            Object[] n = new Object[items.length * 2];
            for (int i = 0; i < count; i++) {
                n[i] = items[(head + i) % items.length];
            }
            items = n;
            head = 0;
            tail = count;
        }
    }
}
